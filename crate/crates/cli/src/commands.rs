use std::fmt::Write as _;
use std::path::Path;

use clap::Args;
use morsecover::covering::{
    greedy_select, is_satellite_config, kappa_bound, packing_count, partition_disjoint, KappaMode, SatelliteConfig,
    TaggedFamily, DEFAULT_TAU,
};
use morsecover::geometry::{validate_morse, Certification};
use morsecover::integrate::{integrate as run_integrate, pv_counterexample, pv_min_radius, Gauge, Integrand, IntegralCertificate, IntegrateOptions};
use morsecover::measure::{ae_cover, AeCover, CoverOptions, MorseFamily, ScaledFamily};
use morsecover::{AaBox, MorseSet, Norm, Point, RadonMeasure, Region, Shape, Space};
use serde_yaml::Value;

use crate::config::{build_sets, ConfigError, IntegrandSpec, Loaded};
use crate::report::{num, shape_record, sig12, table, to_yaml, Map};
use crate::{svg, Common};

/// Why a subcommand could not produce its report.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Contract(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => 2,
            Failure::Contract(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Contract(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Input(e.0)
    }
}

impl From<morsecover::Error> for Failure {
    fn from(e: morsecover::Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Contract(e.to_string())
        }
    }
}

fn io(path: &Path, e: std::io::Error) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| io(path, e))
}

/// A finished report; `ok` is false when some verdict failed.
pub struct Outcome {
    pub report: String,
    pub ok: bool,
}

fn finish(c: &Common, report: String, ok: bool) -> Result<Outcome, Failure> {
    if let Some(p) = &c.out {
        write_file(p, &report)?;
    }
    Ok(Outcome { report, ok })
}

fn loaded(c: &Common) -> Result<Option<Loaded>, Failure> {
    c.config.as_deref().map(Loaded::from_path).transpose().map_err(Failure::from)
}

fn require(c: &Common, what: &str) -> Result<Loaded, Failure> {
    loaded(c)?.ok_or_else(|| Failure::Input(format!("{what} needs --config")))
}

fn parse_norm(s: &str) -> Result<Norm, Failure> {
    serde_yaml::from_str(s).map_err(|_| Failure::Input(format!("unknown norm `{s}`; use l1, l2 or linf")))
}

fn norm_name(n: &Norm) -> String {
    match n {
        Norm::L1 => "l1".into(),
        Norm::L2 => "l2".into(),
        Norm::Linf => "linf".into(),
        Norm::WeightedLinf(w) => format!("weighted_linf({})", w.iter().map(|x| sig12(*x)).collect::<Vec<_>>().join(", ")),
    }
}

fn kv(out: &mut String, rows: &[(&str, String)]) {
    let w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<w$}  {v}");
    }
}

fn coords(p: &[f64]) -> Vec<String> {
    p.iter().map(|c| sig12(*c)).collect()
}

fn axis_header(prefix: &[&'static str], d: usize) -> Vec<String> {
    prefix.iter().map(|s| s.to_string()).chain((1..=d).map(|i| format!("x{i}"))).collect()
}

fn table_owned(header: &[String], rows: &[Vec<String>]) -> String {
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    table(&h, rows)
}

#[derive(Args, Debug)]
pub struct PackArgs {
    /// Dimension.
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// l1, l2 or linf.
    #[arg(long, default_value = "l2")]
    pub norm: String,
    /// Container radius.
    #[arg(long, default_value_t = 2.0)]
    pub container: f64,
    /// Minimum pairwise distance.
    #[arg(long, default_value_t = 1.0)]
    pub mindist: f64,
    /// Require the origin among the points.
    #[arg(long)]
    pub anchored: bool,
    /// Place points on the container surface only.
    #[arg(long)]
    pub surface: bool,
    /// Rounds of perturbation search after greedy seeding.
    #[arg(long, default_value_t = 1000)]
    pub budget: usize,
    /// Morse constant for the kappa bound.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
}

pub fn pack(a: &PackArgs, c: &Common) -> Result<Outcome, Failure> {
    let space = match loaded(c)? {
        Some(l) => l.space()?,
        None => Space::new(a.d, parse_norm(&a.norm)?)?,
    };
    let seed = c.seed.unwrap_or(0);
    let b = packing_count(&space, a.container, a.mindist, a.anchored, a.surface, a.budget, seed)?;
    let verified = b.witness.verify(&space);
    let mut out = String::from("# packing\n");
    kv(
        &mut out,
        &[
            ("dim", space.dim().to_string()),
            ("norm", norm_name(space.norm())),
            ("container", sig12(a.container)),
            ("mindist", sig12(a.mindist)),
            ("anchored", a.anchored.to_string()),
            ("surface", a.surface.to_string()),
            ("budget", a.budget.to_string()),
            ("seed", seed.to_string()),
        ],
    );
    out += "\n";
    out += &table(
        &["lower", "upper", "witness_verified"],
        &[vec![b.lower.to_string(), b.upper.to_string(), verified.to_string()]],
    );
    out += "\n# kappa\n";
    let mut rows = Vec::new();
    for (name, mode) in [("balls", KappaMode::Balls), ("morse", KappaMode::Morse)] {
        rows.push(vec![name.to_string(), sig12(a.lambda), kappa_bound(&space, a.lambda, mode)?.to_string()]);
    }
    out += &table(&["mode", "lambda", "bound"], &rows);
    out += "\n# witness\n";
    let rows: Vec<Vec<String>> = b
        .witness
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| std::iter::once(i.to_string()).chain(coords(p)).collect())
        .collect();
    out += &table_owned(&axis_header(&["i"], space.dim()), &rows);
    finish(c, out, verified)
}

fn family_of(n: usize, families: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut f = vec![None; n];
    for (k, fam) in families.iter().enumerate() {
        for &i in fam {
            f[i] = Some(k);
        }
    }
    f
}

fn index_list(v: &[usize]) -> String {
    format!("[{}]", v.iter().map(usize::to_string).collect::<Vec<_>>().join(", "))
}

/// Planar covers become SVG; other dimensions get a coordinate table.
fn drawing(space: &Space, sets: &[MorseSet], family: &[Option<usize>]) -> String {
    if space.dim() == 2 {
        return svg::render(space, sets, family);
    }
    let rows: Vec<Vec<String>> = sets
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let fam = family[i].map(|k| k.to_string()).unwrap_or_else(|| "-".into());
            [i.to_string(), fam, s.kind().to_string(), sig12(s.inner_radius()), sig12(s.lambda())]
                .into_iter()
                .chain(coords(s.tag()))
                .collect()
        })
        .collect();
    table_owned(&axis_header(&["i", "family", "kind", "r", "lambda"], space.dim()), &rows)
}

fn centered_balls(sets: &[MorseSet]) -> bool {
    sets.iter().all(|s| matches!(s.shape(), Shape::Ball { center, closed: true, .. } if center == s.tag()))
}

pub fn cover(c: &Common) -> Result<Outcome, Failure> {
    let l = require(c, "cover")?;
    let space = l.space()?;
    let tau = l.cfg.tau.unwrap_or(DEFAULT_TAU);
    if !l.cfg.sets.is_empty() {
        return select_explicit(c, &l, &space, tau);
    }
    let mu = l.measure(space.dim())?;
    let omega = l.region(&space)?;
    let fam = l.family(&space)?;
    let gauge = match &l.cfg.gauge {
        Some(g) => g.build(space.dim())?,
        None => Gauge::constant(1.0)?,
    };
    let eps = c.eps.or(l.cfg.eps).unwrap_or(1e-3);
    let seed = c.seed.or(l.cfg.seed).unwrap_or(0);
    let mut opts = CoverOptions::new(eps).with_seed(seed).with_tau(tau);
    if let Some(t) = c.tol.or(l.cfg.tol) {
        opts = opts.with_tol(t);
    }
    let cv = ae_cover(&mu, &omega, &fam, &gauge, &opts)?;
    let verified = cv.verify(&space, &mu, &gauge);
    let mut out = String::from("# a.e. cover\n");
    kv(
        &mut out,
        &[
            ("dim", space.dim().to_string()),
            ("norm", norm_name(space.norm())),
            ("family_lambda", sig12(fam.lambda())),
            ("tau", sig12(tau)),
            ("seed", seed.to_string()),
            ("eps", sig12(cv.eps)),
            ("tol", sig12(cv.tol)),
            ("sets", cv.len().to_string()),
            ("omega_mass", sig12(cv.omega_mass.value)),
            ("residual", sig12(cv.residual.value)),
            ("excess", sig12(cv.excess)),
            ("kappa_mode", format!("{:?}", cv.kappa_mode).to_lowercase()),
            ("kappa", cv.kappa.to_string()),
            ("m", "1".into()),
            ("disjoint", "true".into()),
            ("exact", cv.exact.to_string()),
            ("verified", verified.is_ok().to_string()),
        ],
    );
    if let Err(e) = &verified {
        let _ = writeln!(out, "verification_error  {e}");
    }
    out += "\n# rounds\n";
    out += &rounds_table(&cv);
    if let Some(p) = &c.svg {
        write_file(p, &drawing(&space, &cv.sets, &vec![Some(0); cv.len()]))?;
    }
    finish(c, out, verified.is_ok())
}

fn rounds_table(cv: &AeCover) -> String {
    let rows: Vec<Vec<String>> = cv
        .rounds
        .iter()
        .map(|r| {
            vec![
                r.round.to_string(),
                sig12(r.eta),
                r.pool.to_string(),
                sig12(r.pool_mass),
                r.families.to_string(),
                r.chosen.to_string(),
                sig12(r.captured),
                sig12(r.residual),
            ]
        })
        .collect();
    table(&["round", "eta", "pool", "pool_mass", "families", "chosen", "captured", "residual"], &rows)
}

fn select_explicit(c: &Common, l: &Loaded, space: &Space, tau: f64) -> Result<Outcome, Failure> {
    let sets = build_sets(space, &l.cfg.sets)?;
    let mode = if centered_balls(&sets) { KappaMode::Balls } else { KappaMode::Morse };
    let fam = TaggedFamily::new(space, sets)?;
    let kappa = kappa_bound(space, fam.lambda(), mode)?;
    let order = greedy_select(&fam, tau)?;
    let part = partition_disjoint(&fam, &order)?;
    let uncovered = part.uncovered_tags(&fam);
    let within = (part.m() as u128) <= kappa;
    let mut out = String::from("# selection and partition\n");
    kv(
        &mut out,
        &[
            ("dim", space.dim().to_string()),
            ("norm", norm_name(space.norm())),
            ("sets", fam.len().to_string()),
            ("lambda", sig12(fam.lambda())),
            ("tau", sig12(tau)),
            ("kappa_mode", format!("{mode:?}").to_lowercase()),
            ("kappa", kappa.to_string()),
            ("selected", part.selection_order.len().to_string()),
            ("selection_order", index_list(&part.selection_order)),
            ("m", part.m().to_string()),
            ("m_within_kappa", within.to_string()),
            ("exact", part.exact.to_string()),
            ("uncovered_tags", index_list(&uncovered)),
        ],
    );
    out += "\n# families\n";
    let rows: Vec<Vec<String>> =
        part.families.iter().enumerate().map(|(k, f)| vec![k.to_string(), index_list(f)]).collect();
    out += &table(&["family", "sets"], &rows);
    if let Some(p) = &c.svg {
        let selected: Vec<MorseSet> = part.selection_order.iter().map(|&i| fam.sets()[i].clone()).collect();
        let colors = family_of(fam.len(), &part.families);
        let colors: Vec<Option<usize>> = part.selection_order.iter().map(|&i| colors[i]).collect();
        write_file(p, &drawing(space, &selected, &colors))?;
    }
    finish(c, out, uncovered.is_empty() && within)
}

#[derive(Args, Debug)]
pub struct IntegrateArgs {
    /// Named integrand; see the README for the list.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Expression in x1..xd (or x, y, z).
    #[arg(long)]
    pub expr: Option<String>,
    /// Dimension when no config is given.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Norm when no config is given.
    #[arg(long, default_value = "l2")]
    pub norm: String,
    /// Cover sets listed in the certificate.
    #[arg(long, default_value_t = 1000)]
    pub listing: usize,
}

struct Problem {
    space: Space,
    mu: RadonMeasure,
    omega: Region,
    family: ScaledFamily,
    f: Integrand,
    opts: IntegrateOptions,
}

fn problem(a: &IntegrateArgs, c: &Common) -> Result<Problem, Failure> {
    let l = loaded(c)?;
    let space = match &l {
        Some(l) => l.space()?,
        None => Space::new(a.dim, parse_norm(&a.norm)?)?,
    };
    let d = space.dim();
    let unit = || AaBox::new(Point::zeros(d), Point::from(vec![1.0; d]));
    let (mu, omega, family) = match &l {
        Some(l) => (
            match &l.cfg.measure {
                Some(_) => l.measure(d)?,
                None => RadonMeasure::lebesgue_on(unit()?)?,
            },
            match &l.cfg.region {
                Some(_) => l.region(&space)?,
                None => Region::unit_cube(d),
            },
            l.family(&space)?,
        ),
        None => (RadonMeasure::lebesgue_on(unit()?)?, Region::unit_cube(d), ScaledFamily::closed_balls(&space)?),
    };
    let cfg = l.as_ref().map(|l| &l.cfg);
    let spec = if a.builtin.is_some() || a.expr.is_some() {
        IntegrandSpec { builtin: a.builtin.clone(), expr: a.expr.clone(), null_points: Vec::new() }
    } else {
        cfg.and_then(|c| c.integrand.clone())
            .ok_or_else(|| Failure::Input("integrate needs --builtin, --expr or an `integrand` section".into()))?
    };
    let f = spec.build(d)?;
    let mut opts = IntegrateOptions::new(c.eps.or(cfg.and_then(|c| c.eps)).unwrap_or(1e-3))
        .with_seed(c.seed.or(cfg.and_then(|c| c.seed)).unwrap_or(0));
    if let Some(t) = c.tol.or(cfg.and_then(|c| c.tol)) {
        opts = opts.with_tol(t);
    }
    if let Some(t) = cfg.and_then(|c| c.tau) {
        opts.tau = t;
    }
    Ok(Problem { space, mu, omega, family, f, opts })
}

fn certificate_yaml(cert: &IntegralCertificate, p: &Problem, verified: &Result<(), morsecover::Error>, limit: usize) -> Value {
    let cv = &cert.cover;
    let sources = cert.sources.iter().fold(Map::new(), |m, (k, v)| m.put(k, *v as u64));
    let plan = Map::new()
        .num("modulus_eps", cert.plan.modulus_eps)
        .num("lebesgue_gamma", cert.plan.lebesgue_gamma)
        .put("lebesgue_points", cert.plan.lebesgue_radii.len() as u64)
        .put("null_eta", cert.plan.null_eta.map(num).unwrap_or(Value::Null))
        .num("null_error", cert.plan.null_error);
    let listing: Vec<Value> = cv
        .sets
        .iter()
        .zip(&cv.masses)
        .take(limit)
        .map(|(s, m)| {
            let mut rec = shape_record(s);
            if let Value::Mapping(map) = &mut rec {
                map.insert("mass".into(), num(*m));
                map.insert("f".into(), num(p.f.eval(s.tag())));
            }
            rec
        })
        .collect();
    let cover = Map::new()
        .put("sets", cv.len() as u64)
        .put("listed", listing.len() as u64)
        .put("exact", cv.exact)
        .put("kappa", cv.kappa.to_string())
        .put("kappa_mode", format!("{:?}", cv.kappa_mode).to_lowercase())
        .num("omega_mass", cv.omega_mass.value)
        .num("residual", cv.residual.value)
        .num("excess", cv.excess)
        .put("rounds", cert.rounds as u64)
        .put("listing", Value::Sequence(listing));
    Map::new()
        .put("integrand", cert.integrand.as_str())
        .put("dim", p.space.dim() as u64)
        .put("norm", norm_name(p.space.norm()))
        .num("value", cert.value)
        .num("eps", cert.eps)
        .num("tol", cv.tol)
        .put("seed", cert.seed)
        .num("error_bound", cert.error_bound)
        .num("sum", cert.sum)
        .num("abs_sum", cert.abs_sum)
        .num("sum_plus", cert.sum_plus)
        .num("sum_minus", cert.sum_minus)
        .num("mu_omega", cert.mu_omega)
        .num("residual", cert.residual)
        .num("weighted_excess", cert.weighted_excess)
        .num("sup_abs", cert.sup_abs)
        .put("sup_declared", cert.sup_declared)
        .put("rigorous", cert.rigorous)
        .put("verified", verified.is_ok())
        .put("attempts", cert.attempts as u64)
        .put("sources", sources)
        .put("plan", plan)
        .put("cover", cover)
        .into()
}

pub fn integrate(a: &IntegrateArgs, c: &Common) -> Result<Outcome, Failure> {
    let p = problem(a, c)?;
    let cert = run_integrate(&p.f, &p.omega, &p.mu, &p.family, &p.opts)?;
    let verified = cert.verify(&p.space, &p.mu, &p.f);
    let doc = to_yaml(&certificate_yaml(&cert, &p, &verified, a.listing));
    if let Some(path) = &c.svg {
        write_file(path, &drawing(&p.space, &cert.cover.sets, &vec![Some(0); cert.cover.len()]))?;
    }
    let mut report = match &c.out {
        Some(path) => {
            write_file(path, &doc)?;
            let mut s = String::new();
            kv(
                &mut s,
                &[
                    ("integrand", cert.integrand.clone()),
                    ("value", sig12(cert.value)),
                    ("error_bound", sig12(cert.error_bound)),
                    ("sets", cert.cover.len().to_string()),
                    ("verified", verified.is_ok().to_string()),
                    ("certificate", path.display().to_string()),
                ],
            );
            s
        }
        None => doc,
    };
    if let Err(e) = &verified {
        let _ = writeln!(report, "# verification failed: {e}");
    }
    Ok(Outcome { report, ok: verified.is_ok() })
}

#[derive(Args, Debug)]
pub struct PvArgs {
    /// Number of sets A_n carrying mass.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Times the central radius is halved after `--r0`.
    #[arg(long, default_value_t = 10)]
    pub halvings: u32,
    /// First central radius of the halving sequence.
    #[arg(long, default_value_t = 1.0)]
    pub r0: f64,
}

pub fn pv_demo(a: &PvArgs, c: &Common) -> Result<Outcome, Failure> {
    let r_min = pv_min_radius(a.n);
    let first = pv_counterexample(a.n, r_min)?;
    let mut rows = vec![vec![
        "min".to_string(),
        first.n_balls.to_string(),
        sig12(first.central_radius),
        sig12(first.sum),
        sig12(first.abs_sum),
    ]];
    let mut abs = Vec::new();
    let mut skipped = 0;
    for k in 0..=a.halvings {
        let r = a.r0 / 2f64.powi(k as i32);
        if r < r_min {
            skipped += 1;
            continue;
        }
        let rep = pv_counterexample(a.n, r)?;
        abs.push(rep.abs_sum);
        rows.push(vec![
            k.to_string(),
            rep.n_balls.to_string(),
            sig12(rep.central_radius),
            sig12(rep.sum),
            sig12(rep.abs_sum),
        ]);
    }
    let mut out = String::from("# principal-value counterexample\n");
    out += &table(&["halving", "n_balls", "central_radius", "sum", "abs_sum"], &rows);
    out += "\n";
    let increasing = abs.windows(2).all(|w| w[1] > w[0]);
    let growth = match (abs.first(), abs.last()) {
        (Some(f), Some(l)) if *f > 0.0 => sig12(l / f),
        _ => "-".into(),
    };
    let mut foot = vec![
        ("minus_ln_2", sig12(-std::f64::consts::LN_2)),
        ("sum_gap_at_min_radius", sig12((first.sum + std::f64::consts::LN_2).abs())),
        ("abs_sum_increasing", increasing.to_string()),
        ("abs_sum_growth", growth),
    ];
    if skipped > 0 {
        foot.push(("radii_below_min_skipped", skipped.to_string()));
    }
    kv(&mut out, &foot);
    finish(c, out, true)
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Sample size for sampled certification.
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
}

pub fn validate(a: &ValidateArgs, c: &Common) -> Result<Outcome, Failure> {
    let l = require(c, "validate")?;
    let space = l.space()?;
    if l.cfg.sets.is_empty() {
        return Err(Failure::Input("validate: the config lists no `sets`".into()));
    }
    let sets = build_sets(&space, &l.cfg.sets)?;
    let mut ok = true;
    let mut rows = Vec::new();
    for (i, s) in sets.iter().enumerate() {
        let r = validate_morse(&space, s, a.samples)?;
        ok &= r.valid;
        let cert = match r.certification {
            Certification::Exact => "exact",
            Certification::Sampled => "sampled",
        };
        rows.push(vec![
            i.to_string(),
            s.kind().to_string(),
            r.valid.to_string(),
            sig12(s.lambda()),
            sig12(r.min_lambda),
            r.outer_ok.to_string(),
            r.inner_ok.to_string(),
            r.starlike_ok.to_string(),
            format!("{cert}({})", r.samples),
            r.first_failure.unwrap_or_else(|| "-".into()),
        ]);
    }
    let mut out = String::from("# morse sets\n");
    out += &table(
        &["i", "kind", "valid", "lambda", "min_lambda", "outer", "inner", "starlike", "certification", "failure"],
        &rows,
    );
    if let Some(sat) = &l.cfg.satellite {
        let v = is_satellite_config(&space, &SatelliteConfig { sets: sets.clone(), tau: sat.tau })?;
        ok &= v.valid;
        out += "\n# satellite configuration\n";
        kv(
            &mut out,
            &[
                ("tau", sig12(sat.tau)),
                ("valid", v.valid.to_string()),
                ("violation", v.violation.map(|x| x.to_string()).unwrap_or_else(|| "-".into())),
                ("exact", v.exact.to_string()),
            ],
        );
    }
    finish(c, out, ok)
}
