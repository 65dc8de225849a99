use super::search::{Outcome, Search};
use super::{NumericsError, SolverConfig};
use crate::expr::FuncExpr;
use crate::ext::ExtReal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum EnvelopeValue {
    Finite { value: f64 },
    /// The objective dropped below `-divergence_bound` at `witness`.
    NegInfinity { witness: Vec<f64>, objective: f64 },
    /// The best point lies on the outermost ball and the ray probe could
    /// neither certify `-inf` nor find a turning point.
    Inconclusive { best: Vec<f64>, objective: f64 },
}

impl EnvelopeValue {
    pub fn finite(&self) -> Option<f64> {
        match self {
            EnvelopeValue::Finite { value } => Some(*value),
            _ => None,
        }
    }

    /// `-inf` for a certified divergence, NaN when inconclusive.
    pub fn to_f64(&self) -> f64 {
        match self {
            EnvelopeValue::Finite { value } => *value,
            EnvelopeValue::NegInfinity { .. } => f64::NEG_INFINITY,
            EnvelopeValue::Inconclusive { .. } => f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeResult {
    pub value: EnvelopeValue,
    pub minimizers: Vec<Vec<f64>>,
    pub evaluations: u64,
}

fn check_dim(f: &FuncExpr, n: usize) -> Result<(), NumericsError> {
    if n == 0 || n > 2 {
        return Err(NumericsError::Dimension(n));
    }
    if f.dim() > n {
        return Err(NumericsError::Dimension(f.dim()));
    }
    Ok(())
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// `inf_y f(y) + (r/2)‖y − x‖²`.
pub fn moreau_envelope(f: &FuncExpr, r: f64, x: &[f64], cfg: &SolverConfig) -> Result<EnvelopeResult, NumericsError> {
    cfg.validate()?;
    check_dim(f, x.len())?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(NumericsError::Parameter("finite and nonnegative"));
    }
    let obj = |y: &[f64]| f.value_at(y) + 0.5 * r * sq_dist(y, x);
    let search = Search::new(&obj, cfg);
    let outcome = search.minimize(x);
    let evaluations = search.evaluations();
    let (value, minimizers) = match outcome {
        Outcome::Improper => return Err(NumericsError::Improper),
        Outcome::Finite { value, minimizers } => {
            (EnvelopeValue::Finite { value }, minimizers.into_iter().map(|m| m.0).collect())
        }
        Outcome::Unbounded { witness, value } => (EnvelopeValue::NegInfinity { witness, objective: value }, Vec::new()),
        Outcome::Inconclusive { best, value } => (EnvelopeValue::Inconclusive { best, objective: value }, Vec::new()),
    };
    Ok(EnvelopeResult { value, minimizers, evaluations })
}

/// Minimizers attaining the envelope value.
pub fn prox_points(f: &FuncExpr, r: f64, x: &[f64], cfg: &SolverConfig) -> Result<Vec<Vec<f64>>, NumericsError> {
    if !(r > 0.0) {
        return Err(NumericsError::Parameter("positive"));
    }
    let env = moreau_envelope(f, r, x, cfg)?;
    match env.value {
        EnvelopeValue::Finite { .. } => Ok(env.minimizers),
        EnvelopeValue::NegInfinity { .. } => Err(NumericsError::ProxUndefined),
        EnvelopeValue::Inconclusive { best, .. } => Err(NumericsError::Inconclusive(best)),
    }
}

/// `sup_x ⟨y, x⟩ − g(x)`, computed as minus the minimum of `g − ⟨y, ·⟩`
/// searched around the origin.
pub fn fenchel_conjugate(g: &FuncExpr, y: &[f64], cfg: &SolverConfig) -> Result<ExtReal, NumericsError> {
    cfg.validate()?;
    check_dim(g, y.len())?;
    let obj = |x: &[f64]| g.value_at(x) - x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let origin = vec![0.0; y.len()];
    match Search::new(&obj, cfg).minimize(&origin) {
        Outcome::Finite { value, .. } => Ok(ExtReal::Finite(-value)),
        Outcome::Unbounded { .. } => Ok(ExtReal::PosInf),
        Outcome::Inconclusive { best, .. } => Err(NumericsError::Inconclusive(best)),
        Outcome::Improper => Err(NumericsError::Improper),
    }
}

/// `(r/2)‖x‖² − g*(r x)` with `g = f + (r/2)‖·‖²`.
pub fn envelope_via_conjugate(f: &FuncExpr, r: f64, x: &[f64], cfg: &SolverConfig) -> Result<ExtReal, NumericsError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(NumericsError::Parameter("positive"));
    }
    check_dim(f, x.len())?;
    let n = x.len();
    let eye: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { r } else { 0.0 }).collect()).collect();
    let q = FuncExpr::quadratic(eye, vec![0.0; n], 0.0).expect("diagonal quadratic");
    let g = FuncExpr::sum(vec![f.clone(), q]).expect("two terms");
    let rx: Vec<f64> = x.iter().map(|v| r * v).collect();
    let half = 0.5 * r * x.iter().map(|v| v * v).sum::<f64>();
    Ok(match fenchel_conjugate(&g, &rx, cfg)? {
        ExtReal::Finite(c) => ExtReal::Finite(half - c),
        ExtReal::PosInf => ExtReal::NegInf,
        ExtReal::NegInf => ExtReal::PosInf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    fn env(src: &str, r: f64, x: &[f64]) -> EnvelopeResult {
        moreau_envelope(&parse_expr(src).unwrap(), r, x, &cfg()).unwrap()
    }

    #[test]
    fn huber_value_and_minimizer() {
        let e = env("abs(x)", 1.0, &[2.0]);
        assert!((e.value.finite().unwrap() - 1.5).abs() < 1e-9);
        assert_eq!(e.minimizers.len(), 1);
        assert!((e.minimizers[0][0] - 1.0).abs() < 1e-6);
        assert!(e.evaluations > 0);
    }

    #[test]
    fn constant_envelope() {
        for (r, x) in [(0.0, 3.0), (7.0, -1.0)] {
            assert_eq!(env("5", r, &[x]).value.finite(), Some(5.0));
        }
    }

    #[test]
    fn below_threshold_is_negative_infinity() {
        let e = env("-(x^2)", 1.0, &[0.0]);
        let EnvelopeValue::NegInfinity { witness, objective } = &e.value else { panic!("{e:?}") };
        let f = parse_expr("-(x^2)").unwrap();
        assert!(objective < &-1e12);
        assert!(f.value_at(witness) + 0.5 * witness[0] * witness[0] < -1e12);
        assert!(e.minimizers.is_empty());
    }

    #[test]
    fn improper_is_an_error() {
        let f = parse_expr("ind[2e7, inf)").unwrap();
        assert_eq!(moreau_envelope(&f, 1.0, &[0.0], &cfg()), Err(NumericsError::Improper));
    }

    #[test]
    fn prox_examples() {
        let p = prox_points(&parse_expr("ind[0, inf)").unwrap(), 1.0, &[-3.0], &cfg()).unwrap();
        assert_eq!(p.len(), 1);
        assert!(p[0][0].abs() < 1e-6);
        let p = prox_points(&parse_expr("x^2").unwrap(), 1.0, &[3.0], &cfg()).unwrap();
        assert!((p[0][0] - 1.0).abs() < 1e-6);
        let f = parse_expr("-(x^2)").unwrap();
        assert_eq!(prox_points(&f, 1.0, &[0.0], &cfg()), Err(NumericsError::ProxUndefined));
        assert!(prox_points(&f, 0.0, &[0.0], &cfg()).is_err());
    }

    #[test]
    fn prox_of_negative_abs_has_two_points() {
        let p = prox_points(&parse_expr("-abs(x)").unwrap(), 2.0, &[0.0], &cfg()).unwrap();
        assert_eq!(p.len(), 2);
        let mut xs: Vec<f64> = p.iter().map(|v| v[0]).collect();
        xs.sort_by(f64::total_cmp);
        assert!((xs[0] + 0.5).abs() < 1e-6 && (xs[1] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn conjugate_examples() {
        let c = |src: &str, y: f64| fenchel_conjugate(&parse_expr(src).unwrap(), &[y], &cfg()).unwrap();
        assert!((c("0.5*x^2", 2.0).finite().unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(c("3*x", 3.0), ExtReal::Finite(0.0));
        assert_eq!(c("3*x", 2.5), ExtReal::PosInf);
        assert!(c("abs(x)", 0.5).finite().unwrap().abs() < 1e-9);
    }

    #[test]
    fn conjugate_path_matches() {
        let via = |src: &str, r: f64, x: f64| envelope_via_conjugate(&parse_expr(src).unwrap(), r, &[x], &cfg()).unwrap();
        assert!((via("abs(x)", 1.0, 2.0).finite().unwrap() - 1.5).abs() < 1e-9);
        assert!((via("4", 3.0, 1.0).finite().unwrap() - 4.0).abs() < 1e-9);
        assert!((via("x^2", 2.0, 1.0).finite().unwrap() - 0.5).abs() < 1e-9);
        assert_eq!(via("-(x^2)", 1.0, 0.5), ExtReal::NegInf);
    }

    #[test]
    fn two_dimensional_envelope() {
        // Separable: e_1 of x^2 + |y| at (1, 2) is 1/3 + 1.5.
        let e = env("x^2 + abs(y)", 1.0, &[1.0, 2.0]);
        assert!((e.value.finite().unwrap() - (1.0 / 3.0 + 1.5)).abs() < 1e-7, "{e:?}");
        let m = &e.minimizers[0];
        assert!((m[0] - 1.0 / 3.0).abs() < 1e-5 && (m[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn dimension_errors() {
        let f = parse_expr("x^2 + y^2").unwrap();
        assert_eq!(moreau_envelope(&f, 1.0, &[0.0], &cfg()), Err(NumericsError::Dimension(2)));
        assert_eq!(moreau_envelope(&f, 1.0, &[0.0; 3], &cfg()), Err(NumericsError::Dimension(3)));
    }
}
