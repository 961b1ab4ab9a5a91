//! Box index over bounding boxes, backed by an R*-tree for d <= 4.

use rstar::primitives::{GeomWithData, Rectangle};
use rstar::{RTree, AABB};

use crate::geometry::AaBox;

type Item<const N: usize> = GeomWithData<Rectangle<[f64; N]>, usize>;

fn corners<const N: usize>(b: &AaBox) -> ([f64; N], [f64; N]) {
    // Missing axes are padded with zeros; the tree needs at least two.
    let pad = |p: &[f64], i: usize| if i < p.len() { p[i] } else { 0.0 };
    (std::array::from_fn(|i| pad(&b.lo, i)), std::array::from_fn(|i| pad(&b.hi, i)))
}

fn item<const N: usize>(b: &AaBox, id: usize) -> Item<N> {
    let (lo, hi) = corners::<N>(b);
    GeomWithData::new(Rectangle::from_corners(lo, hi), id)
}

fn query_tree<const N: usize>(t: &RTree<Item<N>>, b: &AaBox, out: &mut Vec<usize>) {
    let (lo, hi) = corners::<N>(b);
    out.extend(t.locate_in_envelope_intersecting(&AABB::from_corners(lo, hi)).map(|g| g.data));
}

#[derive(Clone)]
enum Inner {
    D2(RTree<Item<2>>),
    D3(RTree<Item<3>>),
    D4(RTree<Item<4>>),
    Flat(Vec<(AaBox, usize)>),
}

/// Set of `(box, id)` pairs answering "which boxes meet this closed box".
#[derive(Clone)]
pub(crate) struct BoxIndex {
    inner: Inner,
    len: usize,
}

macro_rules! dispatch {
    ($self:expr, $t:ident, $n:ident => $body:expr, $flat:ident => $fbody:expr) => {
        match $self {
            Inner::D2($t) => {
                const $n: usize = 2;
                $body
            }
            Inner::D3($t) => {
                const $n: usize = 3;
                $body
            }
            Inner::D4($t) => {
                const $n: usize = 4;
                $body
            }
            Inner::Flat($flat) => $fbody,
        }
    };
}

impl BoxIndex {
    pub fn new(dim: usize) -> Self {
        Self::bulk(dim, Vec::new())
    }

    pub fn bulk(dim: usize, items: Vec<(AaBox, usize)>) -> Self {
        let len = items.len();
        let inner = match dim {
            1 | 2 => Inner::D2(RTree::bulk_load(items.iter().map(|(b, i)| item::<2>(b, *i)).collect())),
            3 => Inner::D3(RTree::bulk_load(items.iter().map(|(b, i)| item::<3>(b, *i)).collect())),
            4 => Inner::D4(RTree::bulk_load(items.iter().map(|(b, i)| item::<4>(b, *i)).collect())),
            _ => Inner::Flat(items),
        };
        BoxIndex { inner, len }
    }

    #[cfg(test)]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, b: &AaBox, id: usize) {
        self.len += 1;
        dispatch!(&mut self.inner, t, N => t.insert(item::<N>(b, id)), v => v.push((b.clone(), id)))
    }

    /// Ids of stored boxes whose closed envelope meets the closed box `b`.
    pub fn query_into(&self, b: &AaBox, out: &mut Vec<usize>) {
        dispatch!(&self.inner, t, N => query_tree::<N>(t, b, out), v => {
            out.extend(v.iter().filter(|(c, _)| c.intersect(b).is_some()).map(|(_, i)| *i))
        })
    }

    pub fn query(&self, b: &AaBox) -> Vec<usize> {
        let mut out = Vec::new();
        self.query_into(b, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn queries_match_brute_force() {
        for dim in 1..=5 {
            let boxes: Vec<AaBox> = (0..50)
                .map(|k| {
                    let c: Vec<f64> = (0..dim).map(|i| ((k * 7 + i * 3) % 11) as f64).collect();
                    AaBox::cube(&c, 0.5 + (k % 3) as f64 * 0.4)
                })
                .collect();
            let mut idx = BoxIndex::bulk(dim, boxes.iter().cloned().zip(0..).filter(|(_, k)| *k != 3).collect());
            idx.insert(&boxes[7], 70);
            let probe = AaBox::cube(&vec![4.0; dim], 1.5);
            let mut got = idx.query(&probe);
            got.sort();
            let want: Vec<usize> =
                (0..50).filter(|&k| k != 3 && boxes[k].intersect(&probe).is_some()).collect();
            let mut want = want;
            if boxes[7].intersect(&probe).is_some() {
                want.push(70);
            }
            assert_eq!(got, want);
            assert_eq!(idx.len(), 50);
        }
    }
}
