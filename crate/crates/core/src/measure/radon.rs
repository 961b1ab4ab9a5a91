use crate::error::{Error, Result};
use crate::geometry::{AaBox, Point};
use crate::spatial::BoxIndex;

/// A point mass.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub at: Point,
    pub weight: f64,
}

/// Constant Lebesgue density on a closed box.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityPiece {
    pub cell: AaBox,
    pub density: f64,
}

const INDEX_THRESHOLD: usize = 32;

/// Finitely many atoms plus a piecewise-constant density.
///
/// Overlapping density pieces add up.
#[derive(Clone)]
pub struct RadonMeasure {
    dim: usize,
    atoms: Vec<Atom>,
    pieces: Vec<DensityPiece>,
    piece_index: Option<BoxIndex>,
    atom_index: Option<BoxIndex>,
}

impl std::fmt::Debug for RadonMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadonMeasure")
            .field("dim", &self.dim)
            .field("atoms", &self.atoms)
            .field("pieces", &self.pieces)
            .finish()
    }
}

impl PartialEq for RadonMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.atoms == other.atoms && self.pieces == other.pieces
    }
}

impl RadonMeasure {
    pub fn new(dim: usize, atoms: Vec<Atom>, pieces: Vec<DensityPiece>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("dimension must be at least 1"));
        }
        for a in &atoms {
            if a.at.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: a.at.dim() });
            }
            if !a.at.is_finite() {
                return Err(Error::input("atom locations must be finite"));
            }
            if !(a.weight > 0.0 && a.weight.is_finite()) {
                return Err(Error::input(format!("atom weight must be positive and finite, got {}", a.weight)));
            }
        }
        for p in &pieces {
            if p.cell.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.cell.dim() });
            }
            if !(p.density >= 0.0 && p.density.is_finite()) {
                return Err(Error::input(format!("density must be finite and nonnegative, got {}", p.density)));
            }
            if (0..dim).any(|i| !(p.cell.lo[i] <= p.cell.hi[i])) {
                return Err(Error::input("density box bounds out of order"));
            }
        }
        let piece_index = (pieces.len() >= INDEX_THRESHOLD).then(|| {
            BoxIndex::bulk(dim, pieces.iter().enumerate().map(|(i, p)| (finite_envelope(&p.cell), i)).collect())
        });
        let atom_index = (atoms.len() >= INDEX_THRESHOLD).then(|| {
            BoxIndex::bulk(dim, atoms.iter().enumerate().map(|(i, a)| (AaBox::cube(&a.at, 0.0), i)).collect())
        });
        Ok(RadonMeasure { dim, atoms, pieces, piece_index, atom_index })
    }

    pub fn zero(dim: usize) -> Self {
        RadonMeasure { dim, atoms: Vec::new(), pieces: Vec::new(), piece_index: None, atom_index: None }
    }

    /// Lebesgue measure restricted to a box.
    pub fn lebesgue_on(cell: AaBox) -> Result<Self> {
        Self::new(cell.dim(), Vec::new(), vec![DensityPiece { cell, density: 1.0 }])
    }

    pub fn dirac(at: Point, weight: f64) -> Result<Self> {
        Self::new(at.dim(), vec![Atom { at, weight }], Vec::new())
    }

    pub fn plus(&self, other: &RadonMeasure) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        Self::new(self.dim, atoms, pieces)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::input(format!("measure scale must be positive, got {c}")));
        }
        let atoms = self.atoms.iter().map(|a| Atom { at: a.at.clone(), weight: c * a.weight }).collect();
        let pieces =
            self.pieces.iter().map(|p| DensityPiece { cell: p.cell.clone(), density: c * p.density }).collect();
        Self::new(self.dim, atoms, pieces)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn pieces(&self) -> &[DensityPiece] {
        &self.pieces
    }

    pub fn has_density(&self) -> bool {
        self.pieces.iter().any(|p| p.density > 0.0)
    }

    /// Total mass; infinite when a positive density sits on an unbounded box.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum::<f64>()
            + self.pieces.iter().map(|p| if p.density > 0.0 { p.density * p.cell.volume() } else { 0.0 }).sum::<f64>()
    }

    /// Bounding box of the support.
    pub fn support_hull(&self) -> Option<AaBox> {
        let mut hull: Option<AaBox> = None;
        let boxes = self
            .atoms
            .iter()
            .map(|a| AaBox::cube(&a.at, 0.0))
            .chain(self.pieces.iter().filter(|p| p.density > 0.0 && p.cell.volume() > 0.0).map(|p| p.cell.clone()));
        for b in boxes {
            hull = Some(match hull {
                None => b,
                Some(h) => h.union_hull(&b),
            });
        }
        hull
    }

    /// Density pieces whose box meets `b`.
    pub fn pieces_meeting(&self, b: &AaBox) -> Vec<&DensityPiece> {
        match &self.piece_index {
            Some(ix) => {
                let mut ids = ix.query(&finite_envelope(b));
                ids.sort_unstable();
                ids.into_iter().map(|i| &self.pieces[i]).filter(|p| p.cell.intersect(b).is_some()).collect()
            }
            None => self.pieces.iter().filter(|p| p.cell.intersect(b).is_some()).collect(),
        }
    }

    /// Indices of atoms inside the closed box `b`, ascending.
    pub fn atoms_in_box(&self, b: &AaBox) -> Vec<usize> {
        match &self.atom_index {
            Some(ix) => {
                let mut ids: Vec<usize> =
                    ix.query(&finite_envelope(b)).into_iter().filter(|&i| b.contains(&self.atoms[i].at)).collect();
                ids.sort_unstable();
                ids
            }
            None => (0..self.atoms.len()).filter(|&i| b.contains(&self.atoms[i].at)).collect(),
        }
    }

    /// Lebesgue part of the closed box `b`.
    pub fn density_mass_of_box(&self, b: &AaBox) -> f64 {
        self.pieces_meeting(b).iter().map(|p| p.density * p.cell.overlap_volume(b)).sum()
    }

    /// Full mass of the closed box `b`, atoms included.
    pub fn mass_of_box(&self, b: &AaBox) -> f64 {
        self.density_mass_of_box(b) + self.atoms_in_box(b).iter().map(|&i| self.atoms[i].weight).sum::<f64>()
    }

    /// Density at `x`.
    pub fn density_at(&self, x: &[f64]) -> f64 {
        let b = AaBox::cube(x, 0.0);
        self.pieces_meeting(&b).iter().map(|p| p.density).sum()
    }
}

/// Replace infinite bounds by large finite ones for the R-tree.
fn finite_envelope(b: &AaBox) -> AaBox {
    let f = |v: f64| v.clamp(-1e300, 1e300);
    AaBox { lo: Point::new(b.lo.iter().map(|v| f(*v))), hi: Point::new(b.hi.iter().map(|v| f(*v))) }
}
