use std::cell::RefCell;
use std::sync::Arc;

use morsecover::integrate::Integrand;

thread_local! {
    static CTX: RefCell<meval::Context<'static>> = RefCell::new(meval::Context::new());
}

fn var_names(dim: usize) -> Vec<String> {
    let short = ["x", "y", "z"];
    let mut names: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    if dim <= 3 {
        names.extend(short[..dim].iter().map(|s| s.to_string()));
    }
    names
}

pub type Compiled = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Compile `src` into a function of `dim` coordinates, named `x1..xd`, or
/// `x, y, z` when `dim <= 3`.
pub fn compile(src: &str, dim: usize) -> Result<Compiled, String> {
    let expr: meval::Expr = src.parse().map_err(|e| format!("cannot parse expression `{src}`: {e}"))?;
    let names = var_names(dim);
    let bind = move |x: &[f64], expr: &meval::Expr| -> Result<f64, meval::Error> {
        CTX.with(|c| {
            let mut c = c.borrow_mut();
            for (i, n) in names.iter().enumerate() {
                c.var(n.clone(), x[i % dim]);
            }
            expr.eval_with_context(&*c)
        })
    };
    bind(&vec![0.5; dim], &expr).map_err(|e| format!("cannot evaluate `{src}`: {e}"))?;
    Ok(Arc::new(move |x: &[f64]| bind(x, &expr).unwrap_or(f64::NAN)))
}

/// Integrand from an expression, with a sampled continuity modulus.
pub fn integrand(src: &str, dim: usize) -> Result<Integrand, String> {
    let f = compile(src, dim)?;
    Ok(Integrand::new(src, move |x| f(x)).with_estimated_modulus())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variables_by_both_names() {
        let f = compile("x^2 + y", 2).unwrap();
        assert_eq!(f(&[3.0, 1.0]), 10.0);
        let g = compile("x1 * x2", 2).unwrap();
        assert_eq!(g(&[3.0, 2.0]), 6.0);
    }

    #[test]
    fn unknown_variables_are_rejected() {
        assert!(compile("x + w", 1).is_err());
        assert!(compile("x +", 1).is_err());
    }

    #[test]
    fn works_across_threads() {
        let f = compile("sin(x)", 1).unwrap();
        let h = std::thread::spawn(move || f(&[0.0]));
        assert_eq!(h.join().unwrap(), 0.0);
    }
}
