//! Subcommand arguments and their pipelines.

use std::io::Write;

use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use brw_core::expansions::{
    count_prefixes, cover_check, enumerate_prefixes, eq_star_depth, greedy, greedy_remainder,
    lemma31_constant, Point,
};
use brw_core::fourier::{
    expected_mu_hat_sq, mc_mu_hat_sq_grid, mu_hat_sq_upper_bound, nu_hat, sobolev_comparison,
    sobolev_comparison_constants, sobolev_norm, DEFAULT_TOL,
};
use brw_core::measure::{bin_atoms, histogram, mean_binned_mu, mu_n, nu_n, tv_binned};
use brw_core::params::{classify, digit_sum_value, Digit, DigitSum, Mode};
use brw_core::support::{
    gap_depth, gap_neighborhood_probe, gaps, separation_constant, separation_constant_with,
    support_cover, MIN_FLOAT_GAP,
};
use brw_core::tree::{distinct_prefixes, leaf_values, survival_curve, LabelOracle, LeafMode};
use brw_core::{IntPolynomial, ParameterSet};

use crate::report::{Format, Report, Table};
use crate::{Cli, Command, Common};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] brw_core::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_guard() => 3,
            CliError::Core(e) if e.is_numeric() => 4,
            _ => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Usage(msg.into()))
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<T>()
                .map_err(|_| CliError::Usage(format!("bad {what} entry '{t}'")))
        })
        .collect()
}

fn build_params(c: &Common) -> Result<ParameterSet> {
    let values: Vec<f64> = parse_list(&c.digits, "digit")?;
    let probs: Vec<f64> = match &c.probs {
        Some(s) => parse_list(s, "probability")?,
        None => vec![1.0 / values.len() as f64; values.len()],
    };
    if probs.len() != values.len() {
        return usage(format!(
            "{} digits but {} probabilities",
            values.len(),
            probs.len()
        ));
    }
    let digits: Vec<Digit> = values
        .iter()
        .zip(&probs)
        .map(|(&value, &prob)| Digit { value, prob })
        .collect();
    match (c.lambda, &c.minpoly) {
        (Some(_), Some(_)) => usage("give either --lambda or --minpoly, not both"),
        (None, None) => usage("one of --lambda or --minpoly is required"),
        (Some(l), None) => Ok(ParameterSet::new(l, c.arity, digits)?),
        (None, Some(m)) => Ok(ParameterSet::from_min_poly(
            m.parse::<IntPolynomial>()?,
            c.arity,
            digits,
        )?),
    }
}

fn grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return usage(format!(
            "need at least 2 points and t-max > t-min (got {points}, [{lo}, {hi}])"
        ));
    }
    Ok((0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect())
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 20)]
    pub depth: usize,
    #[arg(long, default_value_t = 1024)]
    pub bins: usize,
    /// Draw this many random root-to-leaf paths instead of all leaves.
    #[arg(long)]
    pub sample: Option<usize>,
    /// Histogram range (default: the hull of the support).
    #[arg(long, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub hi: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Which {
    Mu,
    Nu,
}

#[derive(Args, Debug)]
pub struct AtomsArgs {
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
    #[arg(long, value_enum, default_value = "nu")]
    pub measure: Which,
}

#[derive(Args, Debug)]
pub struct ExpectationArgs {
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
    #[arg(long, default_value_t = 2000)]
    pub reps: usize,
    #[arg(long, default_value_t = 1024)]
    pub bins: usize,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t_min: f64,
    #[arg(long, default_value_t = 50.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct MomentsArgs {
    #[arg(long, default_value_t = 20)]
    pub depth: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t_min: f64,
    #[arg(long, default_value_t = 50.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    /// Also estimate by Monte Carlo with this many labelings.
    #[arg(long)]
    pub mc_reps: Option<usize>,
    /// Also evaluate the shell bound with this shell index s.
    #[arg(long)]
    pub shell: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SobolevArgs {
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    /// Truncation points, comma separated.
    #[arg(long, default_value = "100,1000,10000")]
    pub t_max: String,
    #[arg(long, default_value_t = 0.05)]
    pub grid_step: f64,
    /// Compare with the depth-40 second moment. CSV: gamma,t_max,moment_integral,nu_integral,c1,c2
    #[arg(long)]
    pub compare: bool,
}

#[derive(Args, Debug)]
pub struct DigitsumArgs {
    /// Digit indices, comma separated, first level first.
    #[arg(long)]
    pub word: String,
    /// Evaluate in the integer ring of --minpoly.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Args, Debug)]
pub struct WordsArgs {
    #[arg(long, default_value_t = 12)]
    pub depth: usize,
}

#[derive(Args, Debug)]
pub struct GwArgs {
    #[arg(long, default_value = "10,20,40,80")]
    pub depths: String,
    #[arg(long, default_value_t = 100_000)]
    pub reps: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExpansionAction {
    /// Prefix counts for n = 1..depth. CSV: n,count
    Count,
    /// Greedy digits. CSV: n,digit,remainder
    Greedy,
    /// All admissible prefixes of length depth. CSV: prefix,residual
    Children,
    /// Depth L of the covering condition. JSON
    Eqstar,
}

#[derive(Args, Debug)]
pub struct ExpansionsArgs {
    #[arg(value_enum)]
    pub action: ExpansionAction,
    /// Point to expand: p/q, integer or decimal.
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub x: String,
    #[arg(long, default_value_t = 20)]
    pub depth: usize,
    /// Cap on the number of prefixes listed by `children`.
    #[arg(long, default_value_t = 1 << 16)]
    pub limit: usize,
}

#[derive(Args, Debug)]
pub struct CoverArgs {
    /// Word length (default: the depth from `expansions eqstar`).
    #[arg(long = "L")]
    pub l: Option<usize>,
}

#[derive(Args, Debug)]
pub struct GapsArgs {
    #[arg(long, default_value_t = 16)]
    pub depth: usize,
    /// Smallest reported gap (default 0 with --minpoly, 1e-10 otherwise).
    #[arg(long)]
    pub min_width: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SeparationArgs {
    #[arg(long, default_value_t = 16)]
    pub n_max: usize,
    /// Use floating point even when --minpoly is given.
    #[arg(long)]
    pub float: bool,
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    /// Rational probe point p/q.
    #[arg(long, default_value = "1/2")]
    pub q: String,
    #[arg(long, default_value_t = 24)]
    pub n_max: usize,
    /// Gap depth (default: from the separation floor over n <= 16).
    #[arg(long)]
    pub ell: Option<usize>,
    /// Number of trees, seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    pub probes: u64,
}

pub fn run(cli: &Cli) -> Result<()> {
    let c = &cli.common;
    let report = match &cli.command {
        Command::Simulate(a) => simulate(c, a)?,
        Command::Atoms(a) => atoms(c, a)?,
        Command::Expectation(a) => expectation(c, a)?,
        Command::Spectrum(a) => spectrum(c, a)?,
        Command::Moments(a) => moments(c, a)?,
        Command::Sobolev(a) => sobolev(c, a)?,
        Command::Classify => classify_cmd(c)?,
        Command::Digitsum(a) => digitsum(c, a)?,
        Command::Words(a) => words(c, a)?,
        Command::Gw(a) => gw(c, a)?,
        Command::Expansions(a) => expansions(c, a)?,
        Command::Cover(a) => cover(c, a)?,
        Command::Gaps(a) => gaps_cmd(c, a)?,
        Command::Separation(a) => separation(c, a)?,
        Command::Probe(a) => probe(c, a)?,
    };
    let text = report.render(c.format).map_err(CliError::Usage)?;
    match &c.output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn simulate(c: &Common, a: &SimulateArgs) -> Result<Report> {
    let p = build_params(c)?;
    let (hlo, hhi) = p.hull();
    let (lo, hi) = (a.lo.unwrap_or(hlo), a.hi.unwrap_or(hhi));
    let o = LabelOracle::new(c.seed, p);
    let mode = match a.sample {
        Some(count) => LeafMode::Sample {
            count,
            seed: c.seed,
        },
        None => LeafMode::Full,
    };
    let h = histogram(&leaf_values(&o, a.depth, mode)?, lo, hi, a.bins)?;
    let mut t = Table::new(&["bin", "lo", "hi", "count"]);
    for (i, &n) in h.counts.iter().enumerate() {
        let (l, r) = h.edges(i);
        t.push(vec![json!(i), json!(l), json!(r), json!(n)]);
    }
    let doc = json!({
        "depth": a.depth, "seed": c.seed, "lo": h.lo, "hi": h.hi, "total": h.total,
        "below": h.below, "above": h.above, "counts": h.counts,
    });
    Ok(Report::both(t, doc, Format::Csv))
}

fn atoms(c: &Common, a: &AtomsArgs) -> Result<Report> {
    let p = build_params(c)?;
    let m = match a.measure {
        Which::Mu => mu_n(&LabelOracle::new(c.seed, p), a.depth)?,
        Which::Nu => nu_n(&p, a.depth)?,
    };
    let mut t = Table::new(&["x", "weight"]);
    for &(x, w) in m.atoms() {
        t.push(vec![json!(x), json!(w)]);
    }
    Ok(Report::table(t))
}

fn expectation(c: &Common, a: &ExpectationArgs) -> Result<Report> {
    let p = build_params(c)?;
    let (lo, hi) = p.hull();
    let mean = mean_binned_mu(&p, a.depth, a.reps, c.seed, lo, hi, a.bins)?;
    let nu = bin_atoms(&nu_n(&p, a.depth)?, lo, hi, a.bins)?;
    let tv = tv_binned(&mean, &nu);
    let w = (hi - lo) / a.bins as f64;
    let mut t = Table::new(&["bin", "lo", "hi", "mean_mu", "nu"]);
    for i in 0..a.bins {
        t.push(vec![
            json!(i),
            json!(lo + i as f64 * w),
            json!(lo + (i + 1) as f64 * w),
            json!(mean[i]),
            json!(nu[i]),
        ]);
    }
    let doc = json!({"depth": a.depth, "reps": a.reps, "bins": a.bins, "seed": c.seed, "tv": tv, "mean_mu": mean, "nu": nu});
    Ok(Report::both(t, doc, Format::Csv))
}

fn spectrum(c: &Common, a: &SpectrumArgs) -> Result<Report> {
    let p = build_params(c)?;
    let ts = grid(a.t_min, a.t_max, a.points)?;
    let samples = ts
        .par_iter()
        .map(|&t| nu_hat(&p, t, a.tol))
        .collect::<brw_core::Result<Vec<_>>>()?;
    let mut t = Table::new(&["t", "re", "im", "abs", "truncation_error"]);
    for s in samples {
        t.push(vec![
            json!(s.t),
            json!(s.value.re),
            json!(s.value.im),
            json!(s.value.norm()),
            json!(s.truncation_error),
        ]);
    }
    Ok(Report::table(t))
}

fn moments(c: &Common, a: &MomentsArgs) -> Result<Report> {
    let p = build_params(c)?;
    let ts = grid(a.t_min, a.t_max, a.points)?;
    let mc = match a.mc_reps {
        Some(reps) => Some(mc_mu_hat_sq_grid(&p, a.depth, &ts, reps, c.seed)?),
        None => None,
    };
    let mut t = Table::new(&["t", "expected", "mc", "mc_stderr", "bound", "in_range"]);
    for (i, &x) in ts.iter().enumerate() {
        let (m, se) = match &mc {
            Some(v) => (json!(v[i].estimate), json!(v[i].stderr)),
            None => (Value::Null, Value::Null),
        };
        let (b, r) = match a.shell {
            Some(s) => {
                let b = mu_hat_sq_upper_bound(&p, a.depth, s, x, DEFAULT_TOL)?;
                (json!(b.value), json!(b.in_range))
            }
            None => (Value::Null, Value::Null),
        };
        t.push(vec![
            json!(x),
            json!(expected_mu_hat_sq(&p, a.depth, x)),
            m,
            se,
            b,
            r,
        ]);
    }
    Ok(Report::table(t))
}

fn sobolev(c: &Common, a: &SobolevArgs) -> Result<Report> {
    let p = build_params(c)?;
    let t_maxes: Vec<f64> = parse_list(&a.t_max, "t-max")?;
    if a.compare {
        let (c1, c2) = sobolev_comparison_constants(&p, a.gamma)?;
        let mut t = Table::new(&[
            "gamma",
            "t_max",
            "moment_integral",
            "nu_integral",
            "c1",
            "c2",
        ]);
        for pt in sobolev_comparison(&p, a.gamma, &t_maxes, a.grid_step)? {
            t.push(vec![
                json!(a.gamma),
                json!(pt.t_max),
                json!(pt.moment_integral),
                json!(pt.nu_integral),
                json!(c1),
                json!(c2),
            ]);
        }
        return Ok(Report::table(t));
    }
    let mut t = Table::new(&[
        "gamma",
        "t_max",
        "value",
        "converged",
        "last_decade_fraction",
    ]);
    for tm in t_maxes {
        let s = sobolev_norm(&p, a.gamma, tm, a.grid_step)?;
        t.push(vec![
            json!(s.gamma),
            json!(s.t_max),
            json!(s.value),
            json!(s.converged),
            json!(s.last_decade_fraction),
        ]);
    }
    Ok(Report::table(t))
}

fn classify_cmd(c: &Common) -> Result<Report> {
    let Some(m) = &c.minpoly else {
        return usage("classify needs --minpoly");
    };
    let poly: IntPolynomial = m.parse()?;
    let cl = classify(&poly)?;
    let mut t = Table::new(&["kind", "dominant_root", "max_conjugate_modulus"]);
    t.push(vec![
        serde_json::to_value(cl.kind).unwrap_or(Value::Null),
        json!(cl.dominant_root),
        json!(cl.conjugate_moduli.first()),
    ]);
    let mut doc = serde_json::to_value(&cl).unwrap_or(Value::Null);
    doc["minpoly"] = json!(poly.to_string());
    Ok(Report::both(t, doc, Format::Json))
}

fn digitsum(c: &Common, a: &DigitsumArgs) -> Result<Report> {
    let p = build_params(c)?;
    let word: Vec<usize> = parse_list(&a.word, "digit index")?;
    let mode = if a.exact { Mode::Exact } else { Mode::Float };
    let doc = match digit_sum_value(&word, &p, mode)? {
        DigitSum::Float(v) => json!({"word": word, "value": v}),
        DigitSum::Exact(s) => {
            let (ring, _) = p.exact()?;
            json!({
                "word": word,
                "value": ring.scaled_to_f64(&s),
                "numerator": s.numer.coeffs,
                "scale": s.scale,
            })
        }
    };
    Ok(Report::doc(doc))
}

fn words(c: &Common, a: &WordsArgs) -> Result<Report> {
    let p = build_params(c)?;
    let exact = p.has_exact();
    let o = LabelOracle::new(c.seed, p);
    let mut t = Table::new(&["n", "word_count", "distinct_values"]);
    for n in 1..=a.depth {
        let d = distinct_prefixes(&o, n, exact)?;
        t.push(vec![json!(n), json!(d.word_count), json!(d.values.len())]);
    }
    Ok(Report::table(t))
}

fn gw(c: &Common, a: &GwArgs) -> Result<Report> {
    let depths: Vec<usize> = parse_list(&a.depths, "depth")?;
    let mut t = Table::new(&["n", "probability", "stderr"]);
    for pt in survival_curve(&depths, a.reps, c.seed)? {
        t.push(vec![json!(pt.n), json!(pt.probability), json!(pt.stderr)]);
    }
    Ok(Report::table(t))
}

fn expansions(c: &Common, a: &ExpansionsArgs) -> Result<Report> {
    let p = build_params(c)?;
    let x: Point = a.x.parse()?;
    match a.action {
        ExpansionAction::Count => {
            let mut t = Table::new(&["n", "count"]);
            for n in 1..=a.depth {
                // u128 counts may exceed JSON's exact integer range; print as text
                t.push(vec![
                    json!(n),
                    Value::String(count_prefixes(x, &p, n)?.to_string()),
                ]);
            }
            Ok(Report::table(t))
        }
        ExpansionAction::Greedy => {
            let d = greedy(x, &p, a.depth)?;
            let mut t = Table::new(&["n", "digit", "remainder"]);
            for n in 1..=d.len() {
                t.push(vec![
                    json!(n),
                    json!(d[n - 1]),
                    json!(greedy_remainder(x.value(), p.lambda(), &d[..n])),
                ]);
            }
            Ok(Report::table(t))
        }
        ExpansionAction::Children => {
            let mut t = Table::new(&["prefix", "residual"]);
            for s in enumerate_prefixes(x.value(), &p, a.depth, a.limit)? {
                let w: Vec<String> = s
                    .prefix
                    .iter()
                    .map(|&d| p.digits()[d].value.to_string())
                    .collect();
                t.push(vec![Value::String(w.join(" ")), json!(s.residual)]);
            }
            Ok(Report::table(t))
        }
        ExpansionAction::Eqstar => Ok(Report::doc(
            json!({"lambda": p.lambda(), "L": eq_star_depth(p.lambda())}),
        )),
    }
}

fn cover(c: &Common, a: &CoverArgs) -> Result<Report> {
    let p = build_params(c)?;
    let l = match a.l.or_else(|| eq_star_depth(p.lambda())) {
        Some(l) => l,
        None => return usage("no word length satisfies the covering depth condition; pass --L"),
    };
    let r = cover_check(&p, l)?;
    let mut doc = serde_json::to_value(&r).unwrap_or(Value::Null);
    doc["c"] = if r.success {
        json!(lemma31_constant(&p, l)?)
    } else {
        Value::Null
    };
    Ok(Report::doc(doc))
}

fn gaps_cmd(c: &Common, a: &GapsArgs) -> Result<Report> {
    let p = build_params(c)?;
    let exact = p.has_exact();
    let o = LabelOracle::new(c.seed, p);
    let s = support_cover(&o, a.depth, exact)?;
    let min = a
        .min_width
        .unwrap_or(if exact { 0.0 } else { MIN_FLOAT_GAP });
    let g = gaps(&s, a.depth, min);
    let mut t = Table::new(&["level", "alpha", "beta", "width"]);
    for &(lo, hi) in &g.gaps {
        t.push(vec![json!(g.level), json!(lo), json!(hi), json!(hi - lo)]);
    }
    let doc = json!({
        "level": g.level, "exact": exact, "components": s.len(), "measure": s.measure(),
        "suppressed": g.suppressed, "gaps": g.gaps,
    });
    Ok(Report::both(t, doc, Format::Csv))
}

fn separation(c: &Common, a: &SeparationArgs) -> Result<Report> {
    let p = build_params(c)?;
    let rows = if a.float {
        separation_constant_with(&p, a.n_max, Mode::Float)?
    } else {
        separation_constant(&p, a.n_max)?
    };
    let mut t = Table::new(&["n", "min_gap", "normalized_gap", "distinct"]);
    for r in rows {
        t.push(vec![
            json!(r.n),
            json!(r.min_gap),
            json!(r.normalized_gap),
            json!(r.distinct),
        ]);
    }
    Ok(Report::table(t))
}

fn probe(c: &Common, a: &ProbeArgs) -> Result<Report> {
    let p = build_params(c)?;
    let Point::Rational { p: num, q: den } = a.q.parse::<Point>()? else {
        return usage("--q must be a rational p/q");
    };
    let c1 = separation_constant(&p, 16)?
        .iter()
        .map(|r| r.normalized_gap)
        .fold(f64::INFINITY, f64::min);
    let ell = match a.ell {
        Some(l) => l,
        None => gap_depth(p.lambda(), c1)?,
    };
    let reports = (0..a.probes)
        .into_par_iter()
        .map(|k| {
            let seed = c.seed.wrapping_add(k);
            let o = LabelOracle::new(seed, p.clone());
            gap_neighborhood_probe(&o, num, den, a.n_max, ell).map(|r| (seed, r))
        })
        .collect::<brw_core::Result<Vec<_>>>()?;
    let scheduled: usize = reports.iter().map(|(_, r)| r.clusters.len()).sum();
    let events: usize = reports.iter().map(|(_, r)| r.events()).sum();
    let detected: usize = reports
        .iter()
        .flat_map(|(_, r)| &r.clusters)
        .filter(|c| c.event && c.gap.is_some())
        .count();
    let list: Vec<Value> = reports
        .into_iter()
        .map(|(seed, r)| {
            let mut v = serde_json::to_value(&r).unwrap_or(Value::Null);
            v["seed"] = json!(seed);
            v
        })
        .collect();
    Ok(Report::doc(json!({
        "lambda": p.lambda(), "q": format!("{num}/{den}"), "n_max": a.n_max, "c1": c1, "ell_star": ell,
        "probes": a.probes, "scheduled": scheduled, "events": events, "events_with_gap": detected,
        "reports": list,
    })))
}
