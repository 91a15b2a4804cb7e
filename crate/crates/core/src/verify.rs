//! Randomized exact checks of the algebraic identities, reported as JSON lines.

use std::sync::Arc;
use std::time::Instant;

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::calogero::{cm_membership, cm_point, coadjoint_eval, flow_derivative, CmPoint};
use crate::darboux::darboux_normalize;
use crate::derivation::Derivation;
use crate::forms::Form;
use crate::matrix::Matrix;
use crate::necklace::{Necklace, SymplecticData};
use crate::path::Path;
use crate::poly::Polynomial;
use crate::quiver::{ArrowId, VertexId};
use crate::random;
use crate::rep::{
    moment_hamiltonian_residuals, poisson_oracle, trace_evaluate, trace_polynomial, trace_vanishing_probe,
    verify_homomorphism_with, DimensionVector, EntryLayout, ProbeVerdict, RepPoint,
};
use crate::{int, Rational};

/// A coordinate Poisson bracket, replaceable for negative controls.
pub type Oracle = Arc<dyn Fn(&Polynomial, &Polynomial, &DimensionVector, &SymplecticData) -> Polynomial + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Check {
    Jacobi,
    BracketOracle,
    Cartan,
    Poincare,
    CentralExtension,
    Homomorphism,
    MomentHamiltonian,
    TraceKernel,
    Darboux,
    Calogero,
    Conjugation,
    CmFlow,
}

impl Check {
    pub const ALL: [Check; 12] = [
        Check::Jacobi,
        Check::BracketOracle,
        Check::Cartan,
        Check::Poincare,
        Check::CentralExtension,
        Check::Homomorphism,
        Check::MomentHamiltonian,
        Check::TraceKernel,
        Check::Darboux,
        Check::Calogero,
        Check::Conjugation,
        Check::CmFlow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Jacobi => "jacobi",
            Check::BracketOracle => "bracket-oracle",
            Check::Cartan => "cartan",
            Check::Poincare => "poincare",
            Check::CentralExtension => "central-extension",
            Check::Homomorphism => "hom",
            Check::MomentHamiltonian => "moment-hamiltonian",
            Check::TraceKernel => "trace-kernel",
            Check::Darboux => "darboux",
            Check::Calogero => "calogero",
            Check::Conjugation => "conjugation",
            Check::CmFlow => "cm-flow",
        }
    }

    pub fn from_name(name: &str) -> Option<Check> {
        Check::ALL.into_iter().find(|c| c.name() == name)
    }

    /// Stream tag for the per-trial generators.
    fn id(self) -> u32 {
        Check::ALL.iter().position(|&c| c == self).expect("listed") as u32
    }

    fn default_trials(self) -> usize {
        match self {
            Check::Jacobi | Check::BracketOracle => 200,
            Check::MomentHamiltonian | Check::Darboux => 20,
            Check::Calogero | Check::TraceKernel => 50,
            _ => 100,
        }
    }

    fn default_degree(self) -> usize {
        match self {
            Check::Jacobi | Check::BracketOracle | Check::CentralExtension | Check::TraceKernel => 6,
            Check::Darboux => 5,
            Check::Calogero => 5,
            _ => 5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub check: Check,
    pub trials: usize,
    /// Degree bound for random data; the matrix size bound for Calogero-Moser;
    /// the truncation weight for Darboux.
    pub max_degree: usize,
    pub dims: Option<Vec<usize>>,
}

impl CheckConfig {
    pub fn new(check: Check) -> Self {
        Self {
            check,
            trials: check.default_trials(),
            max_degree: check.default_degree(),
            dims: None,
        }
    }
}

#[derive(Clone)]
pub struct Suite {
    pub seed: u64,
    pub omega: SymplecticData,
    pub checks: Vec<CheckConfig>,
    pub timings: bool,
    pub oracle: Oracle,
}

impl Suite {
    pub fn new(seed: u64, omega: SymplecticData, checks: Vec<CheckConfig>) -> Self {
        Self {
            seed,
            omega,
            checks,
            timings: false,
            oracle: Arc::new(poisson_oracle),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub check: String,
    pub seed: u64,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
    /// Up to five failing inputs, in trial order.
    pub counterexamples: Vec<Value>,
    pub elapsed_ms: Option<u128>,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "check": self.check,
            "status": if self.ok() { "pass" } else { "fail" },
            "seed": self.seed,
            "trials": self.trials,
            "passed": self.passed,
            "failed": self.failed,
            "inconclusive": self.inconclusive,
            "counterexamples": self.counterexamples,
        });
        if let Some(ms) = self.elapsed_ms {
            v["elapsed_ms"] = json!(ms);
        }
        v
    }
}

enum Outcome {
    Pass,
    Fail(Value),
    Inconclusive,
}

fn fail(v: Value) -> Outcome {
    Outcome::Fail(v)
}

/// Runs every configured check; report order follows the configuration.
pub fn run_verification_suite(suite: &Suite) -> Vec<CheckReport> {
    suite.checks.iter().map(|c| run_check(suite, c)).collect()
}

pub fn run_check(suite: &Suite, config: &CheckConfig) -> CheckReport {
    let start = Instant::now();
    let outcomes: Vec<Outcome> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = random::trial_rng(suite.seed, config.check.id(), t as u32);
            run_trial(suite, config, &mut rng).unwrap_or_else(|e| fail(json!({ "trial": t, "error": e.to_string() })))
        })
        .collect();
    let mut report = CheckReport {
        check: config.check.name().to_owned(),
        seed: suite.seed,
        trials: config.trials,
        passed: 0,
        failed: 0,
        inconclusive: 0,
        counterexamples: Vec::new(),
        elapsed_ms: None,
    };
    for (t, o) in outcomes.into_iter().enumerate() {
        match o {
            Outcome::Pass => report.passed += 1,
            Outcome::Inconclusive => report.inconclusive += 1,
            Outcome::Fail(mut v) => {
                report.failed += 1;
                if report.counterexamples.len() < 5 {
                    v["trial"] = json!(t);
                    report.counterexamples.push(v);
                }
            }
        }
    }
    if suite.timings {
        report.elapsed_ms = Some(start.elapsed().as_millis());
    }
    report
}

fn run_trial(suite: &Suite, config: &CheckConfig, rng: &mut ChaCha8Rng) -> crate::Result<Outcome> {
    let omega = &suite.omega;
    let q = omega.quiver();
    let deg = config.max_degree;
    match config.check {
        Check::Jacobi => {
            let f = random::necklace(rng, q, 0, deg, 3);
            let g = random::necklace(rng, q, 0, deg, 3);
            let h = random::necklace(rng, q, 0, deg, 3);
            let anti = &omega.bracket(&f, &g) + &omega.bracket(&g, &f);
            let jac = &(&omega.bracket(&f, &omega.bracket(&g, &h)) + &omega.bracket(&g, &omega.bracket(&h, &f)))
                + &omega.bracket(&h, &omega.bracket(&f, &g));
            Ok(if anti.is_zero() && jac.is_zero() {
                Outcome::Pass
            } else {
                fail(json!({
                    "f": f.to_string(), "g": g.to_string(), "h": h.to_string(),
                    "antisymmetry": anti.to_string(), "jacobi": jac.to_string(),
                }))
            })
        }
        Check::BracketOracle => {
            let f = random::necklace(rng, q, 0, deg, 3);
            let g = random::necklace(rng, q, 0, deg, 3);
            let a = omega.bracket(&f, &g);
            let b = omega.bracket_tensor_oracle(&f, &g);
            Ok(if a == b {
                Outcome::Pass
            } else {
                fail(json!({ "f": f.to_string(), "g": g.to_string(), "bracket": a.to_string(), "oracle": b.to_string() }))
            })
        }
        Check::Cartan => cartan_trial(rng, omega, deg),
        Check::Poincare => poincare_trial(rng, omega, deg),
        Check::CentralExtension => {
            let f = random::necklace(rng, q, 0, deg, 3);
            let g = random::necklace(rng, q, 0, deg, 3);
            let lhs = omega.hamiltonian_derivation(&omega.bracket(&f, &g));
            let rhs = omega.hamiltonian_derivation(&f).commutator(&omega.hamiltonian_derivation(&g));
            Ok(if lhs == rhs {
                Outcome::Pass
            } else {
                fail(json!({ "f": f.to_string(), "g": g.to_string(), "theta_fg": lhs.to_string(), "commutator": rhs.to_string() }))
            })
        }
        Check::Homomorphism => {
            let dims = match &config.dims {
                Some(d) => DimensionVector::new(q, d.clone())?,
                None => DimensionVector::uniform(q, 2)?,
            };
            let f = random::necklace(rng, q, 0, deg, 2);
            let g = random::necklace(rng, q, 0, deg, 2);
            let check = verify_homomorphism_with(&f, &g, &dims, omega, &*suite.oracle)?;
            Ok(if check.equal {
                Outcome::Pass
            } else {
                let layout = EntryLayout::new(q, &dims);
                let name = |v: u32| layout.name(v);
                fail(json!({
                    "f": f.to_string(), "g": g.to_string(), "dims": dims.to_string(),
                    "residual": check.residual.display_with(&name).to_string(),
                }))
            })
        }
        Check::MomentHamiltonian => {
            let dims = match &config.dims {
                Some(d) => DimensionVector::new(q, d.clone())?,
                None => {
                    let n = rng.random_range(1..=3);
                    DimensionVector::uniform(q, n)?
                }
            };
            let xi: Vec<Matrix> = q
                .vertices()
                .map(|v| random::integer_matrix(rng, dims.get(v), dims.get(v), 3))
                .collect();
            let residuals = moment_hamiltonian_residuals(&xi, &dims, omega)?;
            Ok(if residuals.is_empty() {
                Outcome::Pass
            } else {
                let xi: Vec<String> = xi.iter().map(Matrix::to_string).collect();
                let entries: Vec<String> = residuals.iter().map(|(n, p)| format!("{n}: {p}")).collect();
                fail(json!({ "dims": dims.to_string(), "xi": xi, "residuals": entries }))
            })
        }
        Check::TraceKernel => trace_kernel_trial(rng, omega, deg),
        Check::Darboux => darboux_trial(rng, omega, deg),
        Check::Calogero => {
            let pt = random_cm_point(rng, deg.max(1))?;
            let n = pt.n();
            let s = pt.shifted_commutator();
            let ok = cm_membership(&pt.x, &pt.y)? && s.rank() == 1 && s.trace() == int(n as i64);
            Ok(if ok {
                Outcome::Pass
            } else {
                fail(json!({ "x": pt.x.to_string(), "y": pt.y.to_string() }))
            })
        }
        Check::Conjugation => {
            let dims = match &config.dims {
                Some(d) => DimensionVector::new(q, d.clone())?,
                None => {
                    let n = rng.random_range(1..=3);
                    DimensionVector::uniform(q, n)?
                }
            };
            let f = random::necklace(rng, q, 0, deg, 3);
            let rho = RepPoint::random(q, dims.clone(), rng, 3);
            let g: Vec<Matrix> = q
                .vertices()
                .map(|v| random::invertible_matrix(rng, dims.get(v), 2))
                .collect();
            let moved = rho.conjugate(&g)?;
            let (a, b) = (trace_evaluate(&f, &rho)?, trace_evaluate(&f, &moved)?);
            let symbolic = trace_polynomial(&f, &dims)?;
            let layout = EntryLayout::new(q, &dims);
            let c = symbolic.evaluate(|v| layout.value_at(&rho, v));
            Ok(if a == b && a == c {
                Outcome::Pass
            } else {
                fail(json!({ "f": f.to_string(), "point": rho.to_json(), "value": a.to_string(), "conjugated": b.to_string(), "polynomial": c.to_string() }))
            })
        }
        Check::CmFlow => {
            let cm = SymplecticData::one_loop();
            let cq = cm.quiver();
            let pt = random_cm_point(rng, 3)?;
            let f = random::necklace(rng, cq, 1, deg, 3);
            let dims = DimensionVector::uniform(cq, pt.n())?;
            let x2 = Necklace::cycle(cq, Path::from_arrows(cq, vec![ArrowId(0), ArrowId(0)])?);
            let bracket = poisson_oracle(&trace_polynomial(&x2, &dims)?, &trace_polynomial(&f, &dims)?, &dims, &cm);
            let rho = pt.rep_point(cq)?;
            let layout = EntryLayout::new(cq, &dims);
            let lhs = bracket.evaluate(|v| layout.value_at(&rho, v));
            let rhs = flow_derivative(&f, &pt)?;
            let necklace_side = coadjoint_eval(&cm.bracket(&x2, &f), &pt)?;
            Ok(if lhs == rhs && lhs == necklace_side {
                Outcome::Pass
            } else {
                fail(json!({ "f": f.to_string(), "x": pt.x.to_string(), "y": pt.y.to_string(), "oracle": lhs.to_string(), "flow": rhs.to_string() }))
            })
        }
    }
}

/// A Calogero-Moser point of random size `1..=max_n` with distinct integer positions.
pub fn random_cm_point<R: Rng + ?Sized>(rng: &mut R, max_n: usize) -> crate::Result<CmPoint> {
    let n = rng.random_range(1..=max_n);
    let x: Vec<Rational> = sample(rng, 21, n).into_iter().map(|k| int(k as i64 - 10)).collect();
    let p: Vec<Rational> = (0..n)
        .map(|_| Rational::new(rng.random_range(-6..=6).into(), rng.random_range(1..=3).into()))
        .collect();
    cm_point(&x, &p)
}

fn contract(f: &Form, theta: &Derivation) -> crate::Result<Option<Form>> {
    if f.degree() == 0 {
        Ok(None)
    } else {
        f.contract(theta).map(Some)
    }
}

fn sub_opt(a: Option<Form>, b: Option<Form>) -> crate::Result<Option<Form>> {
    Ok(match (a, b) {
        (Some(a), Some(b)) => Some(a.try_sub(&b)?),
        (Some(a), None) => Some(a),
        (None, Some(b)) => Some(-&b),
        (None, None) => None,
    })
}

fn is_zero_opt(f: &Option<Form>) -> bool {
    f.as_ref().is_none_or(Form::is_zero)
}

fn cartan_trial(rng: &mut ChaCha8Rng, omega: &SymplecticData, deg: usize) -> crate::Result<Outcome> {
    let q = omega.quiver();
    let k = rng.random_range(0..=2);
    let alpha = random::form(rng, q, k, 1, deg, 2);
    let theta = random::derivation(rng, q, 2, 2);
    let gamma = random::derivation(rng, q, 2, 2);
    let bracket = theta.commutator(&gamma);

    let l_alpha = alpha.lie_derivative(&theta)?;
    let d_i = match contract(&alpha, &theta)? {
        Some(f) => f.d(),
        None => Form::zero(q, k),
    };
    let i_d = alpha.d().contract(&theta)?;
    let magic = l_alpha.try_sub(&d_i.try_add(&i_d)?)?;

    let ll = alpha
        .lie_derivative(&gamma)?
        .lie_derivative(&theta)?
        .try_sub(&l_alpha.lie_derivative(&gamma)?)?
        .try_sub(&alpha.lie_derivative(&bracket)?)?;

    let li = sub_opt(
        contract(&alpha, &gamma)?.map(|f| f.lie_derivative(&theta)).transpose()?,
        contract(&l_alpha, &gamma)?,
    )?;
    let li = sub_opt(li, contract(&alpha, &bracket)?)?;

    let ii = match (contract(&alpha, &gamma)?, contract(&alpha, &theta)?) {
        (Some(ig), Some(it)) => sub_opt(contract(&ig, &theta)?, contract(&it, &gamma)?.map(|f| -&f))?,
        _ => None,
    };

    let dl = alpha.d().lie_derivative(&theta)?.try_sub(&l_alpha.d())?;

    let ok = magic.is_zero() && ll.is_zero() && is_zero_opt(&li) && is_zero_opt(&ii) && dl.is_zero();
    Ok(if ok {
        Outcome::Pass
    } else {
        fail(json!({
            "form": alpha.to_string(), "theta": theta.to_string(), "gamma": gamma.to_string(),
            "L - (d i + i d)": magic.to_string(),
            "[L, L] - L[]": ll.to_string(),
            "[L, i] - i[]": li.map(|f| f.to_string()),
            "[i, i]": ii.map(|f| f.to_string()),
            "[d, L]": dl.to_string(),
        }))
    })
}

fn poincare_trial(rng: &mut ChaCha8Rng, omega: &SymplecticData, deg: usize) -> crate::Result<Outcome> {
    let q = omega.quiver();
    let f = random::necklace(rng, q, 1, deg, 3);
    let f_pos = f.try_sub(&f.homogeneous_part(0))?;
    let one = f_pos.d();
    let beta = random::form(rng, q, 1, 1, deg, 3);
    let two = beta.d();
    let mut problems = Vec::new();
    let round = one.euler_homotopy()?;
    if round.to_necklace()? != f_pos {
        problems.push(format!("h(d f) = {round}, f = {f_pos}"));
    }
    for closed in [&one, &two] {
        if closed.is_zero() {
            continue;
        }
        let back = closed.euler_homotopy()?.d();
        if &back != closed {
            problems.push(format!("d h({closed}) = {back}"));
        }
    }
    Ok(if problems.is_empty() {
        Outcome::Pass
    } else {
        fail(json!({ "problems": problems }))
    })
}

fn trace_kernel_trial(rng: &mut ChaCha8Rng, omega: &SymplecticData, deg: usize) -> crate::Result<Outcome> {
    let q = omega.quiver();
    if q.vertex_count() != 1 {
        return Ok(fail(json!({ "error": "trace-kernel needs a one-vertex quiver" })));
    }
    let half = (deg / 2).max(1);
    let u = random::element(rng, q, half, 2);
    let v = random::element(rng, q, half, 2);
    let commutator = &(&u * &v) - &(&v * &u);
    let seed: u64 = rng.random();
    match trace_vanishing_probe(&commutator, 3, 4, seed) {
        Ok(ProbeVerdict::Kernel) => {}
        Ok(other) => return Ok(fail(json!({ "commutator": commutator.to_string(), "verdict": format!("{other:?}") }))),
        Err(e) => return Ok(fail(json!({ "commutator": commutator.to_string(), "error": e.to_string() }))),
    }
    let f = random::nonzero_necklace(rng, q, 1, deg, 3);
    let max_n = f.degree().unwrap_or(1).max(1);
    Ok(match trace_vanishing_probe(&f.to_element(), max_n, 20, seed)? {
        ProbeVerdict::Witness { .. } => Outcome::Pass,
        ProbeVerdict::Inconclusive => Outcome::Inconclusive,
        ProbeVerdict::Kernel => fail(json!({ "necklace": f.to_string(), "verdict": "kernel" })),
    })
}

fn darboux_trial(rng: &mut ChaCha8Rng, omega: &SymplecticData, n: usize) -> crate::Result<Outcome> {
    let q = omega.quiver();
    if q.vertex_count() != 1 {
        return Ok(fail(json!({ "error": "darboux needs a one-vertex quiver" })));
    }
    let omega0 = random_constant_form(rng, omega);
    let beta = random::one_form(rng, q, 2, 3, 3);
    let form = omega0.try_add(&beta.d())?;
    let phi = darboux_normalize(&form, n)?;
    let pulled = phi.pullback(&form, n)?;
    phi.inverse()?;
    Ok(if pulled == omega0 {
        Outcome::Pass
    } else {
        fail(json!({ "omega": form.to_string(), "phi": phi.to_string(), "pullback": pulled.to_string() }))
    })
}

/// `Σ_a c_a da·da*` with random nonzero `c_a`, nondegenerate by construction.
pub fn random_constant_form<R: Rng + ?Sized>(rng: &mut R, omega: &SymplecticData) -> Form {
    let q = omega.quiver();
    let dq = omega.doubled();
    let e = Path::idempotent(VertexId(0));
    dq.base_arrows().fold(Form::zero(q, 2), |acc, a| {
        let term = Form::two_form_term(q, &e, a, &e, dq.star(a)).scale(&random::coefficient(rng));
        &acc + &term
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn suite(checks: &[Check], trials: usize) -> Suite {
        let configs = checks
            .iter()
            .map(|&c| CheckConfig {
                trials,
                ..CheckConfig::new(c)
            })
            .collect();
        Suite::new(42, SymplecticData::one_loop(), configs)
    }

    #[test]
    fn quick_suite_passes() {
        let reports = run_verification_suite(&suite(&Check::ALL, 3));
        for r in &reports {
            assert!(r.ok(), "{}", r.to_json());
        }
    }

    #[test]
    fn full_size_examples_pass() {
        let jacobi = CheckConfig {
            trials: 200,
            ..CheckConfig::new(Check::Jacobi)
        };
        let hom = CheckConfig {
            trials: 100,
            dims: Some(vec![2]),
            ..CheckConfig::new(Check::Homomorphism)
        };
        let s = Suite::new(42, SymplecticData::one_loop(), vec![jacobi, hom]);
        for r in run_verification_suite(&s) {
            assert_eq!(r.passed, r.trials, "{}", r.to_json());
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let s = suite(&[Check::Jacobi, Check::Homomorphism], 4);
        let a: Vec<Value> = run_verification_suite(&s).iter().map(CheckReport::to_json).collect();
        let b: Vec<Value> = run_verification_suite(&s).iter().map(CheckReport::to_json).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn flipped_oracle_is_caught() {
        let mut s = suite(&[Check::Homomorphism], 5);
        s.oracle = Arc::new(|f, g, d, o| -&poisson_oracle(f, g, d, o));
        let r = &run_verification_suite(&s)[0];
        assert!(r.failed > 0);
        assert!(r.counterexamples[0].get("f").is_some());
    }
}
