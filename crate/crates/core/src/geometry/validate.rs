use super::{MorseSet, Point, Shape, Space};
use crate::error::{Error, Result};
use crate::sampling::{ball_points, directions, Halton};

/// How a verdict was reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Certification {
    /// Decided by closed-form checks.
    Exact,
    /// Closed-form checks unavailable; verdict rests on the deterministic sample.
    Sampled,
}

/// Outcome of [`validate_morse`].
#[derive(Clone, Debug, PartialEq)]
pub struct MorseReport {
    pub valid: bool,
    /// Smallest lambda with `S ⊆ B(tag, lambda * r)` for the stored `r`.
    pub min_lambda: f64,
    pub outer_ok: bool,
    pub inner_ok: bool,
    pub starlike_ok: bool,
    pub certification: Certification,
    pub samples: usize,
    pub first_failure: Option<String>,
}

/// Check `B(tag, r) ⊆ S ⊆ B(tag, lambda r)` and starlikeness of `S` with
/// respect to `B(tag, r)`.
///
/// Balls and intervals are certified by construction. For polytopes the
/// kernel ball is tested exactly against every facet line. All shapes are
/// additionally probed on `samples` deterministic low-discrepancy points.
pub fn validate_morse(space: &Space, s: &MorseSet, samples: usize) -> Result<MorseReport> {
    space.check(s.tag())?;
    if samples == 0 {
        return Err(Error::input("validation needs at least one sample"));
    }
    let r = s.inner_radius();
    let min_lambda = s.min_lambda(space);
    let outer_ok = s.lambda() >= min_lambda * (1.0 - 1e-9);
    let mut first_failure = None;
    if !outer_ok {
        first_failure = Some(format!(
            "set reaches distance {} from the tag, beyond lambda * r = {}",
            min_lambda * r,
            s.lambda() * r
        ));
    }

    let (exact_inner, certification) = match s.shape() {
        Shape::Ball { .. } | Shape::Interval { .. } => (true, Certification::Exact),
        Shape::Polytope { template, scale } => {
            let k = scale * template.kernel_radius(space);
            (r <= k * (1.0 + 1e-9), Certification::Exact)
        }
    };
    if !exact_inner && first_failure.is_none() {
        first_failure = Some("kernel ball B(tag, r) leaves the kernel".to_string());
    }

    // Sampled probes: kernel points y (kept strictly inside B(tag, r)),
    // set points x along sampled rays, and alpha from a Halton coordinate.
    let d = space.dim();
    let ys = ball_points(space, s.tag(), r * (1.0 - 1e-6), samples, 1);
    let dirs = directions(d, samples.max(2));
    let mut alpha_seq = Halton::starting_at(2, 17);
    let mut inner_sampled = true;
    let mut starlike_ok = true;
    for (k, y) in ys.iter().enumerate() {
        if !s.contains_unchecked(space, y) {
            inner_sampled = false;
            if first_failure.is_none() {
                first_failure = Some(format!("kernel point {:?} is not in the set", y.coords()));
            }
        }
        let u = &dirs[k % dirs.len()];
        let h = alpha_seq.next_point();
        let depth = h[1];
        let x: Point = s.tag().axpy(depth * s.radial_extent(space, u), u);
        let alpha = h[0];
        let p = Point::affine(y, &x, alpha);
        if !s.contains_unchecked(space, &p) {
            starlike_ok = false;
            if first_failure.is_none() {
                first_failure = Some(format!(
                    "segment from {:?} to {:?} leaves the set at alpha {alpha}",
                    y.coords(),
                    x.coords()
                ));
            }
        }
    }
    let inner_ok = exact_inner && inner_sampled;
    Ok(MorseReport {
        valid: outer_ok && inner_ok && starlike_ok,
        min_lambda,
        outer_ok,
        inner_ok,
        starlike_ok,
        certification,
        samples,
        first_failure,
    })
}
