//! Cross-route analysis: directional-asymmetry reports, symmetry
//! classification, the similarity map to the hermitian frame, and the
//! verification runner that re-derives every structural identity of the
//! model numerically and reports named residuals against pinned tolerances.

use serde::Serialize;

use crate::dynamics::{self, LadderKind};
use crate::error::{Error, Result};
use crate::fock::{FockBasis, FockState};
use crate::operators::{
    self, AlphaRaiseConvention, C64, HamiltonianVariant, ModelParams, OperatorMatrix,
};
use crate::propagator::{self, Propagator};

/// Pinned tolerances for the verification checks. These are part of the
/// crate's contract: loosening one is an API change, not a test tweak.
pub mod tolerances {
    /// Algebraic identities evaluated at machine precision (commutators,
    /// conservation, PT symmetry).
    pub const ALGEBRAIC: f64 = 1e-12;
    /// Agreement between the closed forms and the matrix-exponential route.
    pub const ORACLE_AGREEMENT: f64 = 1e-9;
    /// Agreement between the closed forms and the Runge-Kutta route.
    pub const ODE_AGREEMENT: f64 = 1e-9;
    /// Sector eigenvalues against the closed-form spectrum, and their
    /// imaginary parts against zero.
    pub const SPECTRUM: f64 = 1e-10;
    /// Factorization of the propagator into free and interaction parts.
    pub const FACTORIZATION: f64 = 1e-10;
    /// Similarity conjugation onto the hermitian-frame Hamiltonian.
    pub const SIMILARITY: f64 = 1e-10;
    /// Exchange-probability ratio identities over the sampled grid.
    pub const ASYMMETRY: f64 = 1e-10;
    /// First-order short-time amplitude, relative.
    pub const FIRST_ORDER_RELATIVE: f64 = 1e-3;
    /// Reciprocal-limit regression against the specialized formulas.
    pub const RECIPROCAL_REGRESSION: f64 = 1e-14;
}

/// How the Hamiltonian sits with respect to hermiticity and PT symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// Equal couplings: hermitian (and trivially PT symmetric).
    ReciprocalHermitian,
    /// Unequal real couplings: non-hermitian but PT symmetric.
    NonreciprocalPt,
    /// Neither hermitian nor PT symmetric (complex couplings).
    Neither,
}

/// Classification outcome with the measured residuals behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryClassification {
    pub regime: Regime,
    pub is_hermitian: bool,
    pub is_pt_symmetric: bool,
    /// Max-norm of H - H^dag.
    pub hermiticity_residual: f64,
    /// Max-norm of Pi conj(H) Pi - H.
    pub pt_residual: f64,
}

/// Classify the model Hamiltonian built from real parameters.
pub fn classify_symmetry(params: &ModelParams, basis: &FockBasis) -> Result<SymmetryClassification> {
    let h = operators::hamiltonian(params, basis, HamiltonianVariant::Nonreciprocal)?;
    classify_matrix(&h, basis)
}

/// Classify an explicit Hamiltonian matrix. This is the entry point for
/// counterexamples built with complex couplings, which the real parameter
/// type cannot represent.
pub fn classify_matrix(h: &OperatorMatrix, basis: &FockBasis) -> Result<SymmetryClassification> {
    let hermiticity_residual = h.max_abs_diff(&h.dagger())?;
    let pt_residual = operators::pt_conjugate(h, basis)?.max_abs_diff(h)?;
    let is_hermitian = hermiticity_residual <= tolerances::ALGEBRAIC;
    let is_pt_symmetric = pt_residual <= tolerances::ALGEBRAIC;
    let regime = if is_hermitian {
        Regime::ReciprocalHermitian
    } else if is_pt_symmetric {
        Regime::NonreciprocalPt
    } else {
        Regime::Neither
    };
    Ok(SymmetryClassification {
        regime,
        is_hermitian,
        is_pt_symmetric,
        hermiticity_residual,
        pt_residual,
    })
}

/// The diagonal similarity map D = exp(theta (N_A - N_B)) that conjugates
/// the non-reciprocal Hamiltonian onto the hermitian one with coupling
/// g_eff; theta = (1/4) ln(omega_ab / omega_ba).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimilarityMap {
    pub g_eff: f64,
    pub theta: f64,
}

pub fn similarity_map(params: &ModelParams) -> Result<SimilarityMap> {
    let g_eff = params.g_eff()?;
    let theta = 0.25 * params.coupling_ratio()?.ln();
    Ok(SimilarityMap { g_eff, theta })
}

/// The matrix of D over a truncated basis (diagonal, positive).
pub fn similarity_transform(params: &ModelParams, basis: &FockBasis) -> Result<OperatorMatrix> {
    let map = similarity_map(params)?;
    let mut d = OperatorMatrix::zeros(basis).into_matrix();
    for (i, s) in basis.states().iter().enumerate() {
        let exponent = map.theta * (s.n_a as f64 - s.n_b as f64);
        d[(i, i)] = C64::new(exponent.exp(), 0.0);
    }
    OperatorMatrix::from_matrix(basis, d)
}

/// Max-norm of D H D^-1 - H_hermitian(g_eff): zero in exact arithmetic.
/// D^-1 is built directly from -theta, not inverted numerically.
pub fn similarity_conjugation_residual(params: &ModelParams, basis: &FockBasis) -> Result<f64> {
    let map = similarity_map(params)?;
    let d = similarity_transform(params, basis)?;
    let mut d_inv = OperatorMatrix::zeros(basis).into_matrix();
    for (i, s) in basis.states().iter().enumerate() {
        let exponent = -map.theta * (s.n_a as f64 - s.n_b as f64);
        d_inv[(i, i)] = C64::new(exponent.exp(), 0.0);
    }
    let d_inv = OperatorMatrix::from_matrix(basis, d_inv)?;
    let h = operators::hamiltonian(params, basis, HamiltonianVariant::Nonreciprocal)?;
    let conjugated = &(&d * &h) * &d_inv;
    let hermitian = operators::hamiltonian(
        params,
        basis,
        HamiltonianVariant::Hermitian { g: map.g_eff },
    )?;
    conjugated.max_abs_diff(&hermitian)
}

/// Whether the rotating-wave form of the model is inside its domain of
/// validity: it breaks down when g_eff exceeds the cavity frequency (the
/// boundary g_eff = omega0 is still admissible).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RwaStatus {
    WithinRwa,
    Breakdown,
}

pub fn rwa_breakdown_check(params: &ModelParams) -> Result<RwaStatus> {
    let g = params.g_eff()?;
    Ok(if g > params.omega0() {
        RwaStatus::Breakdown
    } else {
        RwaStatus::WithinRwa
    })
}

/// Directional photon-exchange asymmetry for a single A -> B hop and its
/// reverse, reported both at first order (amplitudes per unit time) and
/// exactly (sector transition probabilities of the full propagator at a
/// reference time).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymmetryReport {
    pub from: FockState,
    /// The A -> B hop target (n_A - 1, n_B + 1).
    pub forward_target: FockState,
    pub reference_time: f64,
    /// d/dt of the forward transition amplitude at t = 0: i omega_ab sqrt(..).
    pub amp_forward_per_time: C64,
    /// d/dt of the reverse transition amplitude, evaluated from the forward
    /// target back to `from`.
    pub amp_backward_per_time: C64,
    /// Signed forward/backward amplitude ratio omega_ab / omega_ba; None
    /// when the backward amplitude vanishes (infinite asymmetry, reported
    /// explicitly rather than as an overflow).
    pub amplitude_ratio: Option<f64>,
    /// |<target| U(t_ref) |from>|^2, exact (numeric propagator).
    pub prob_forward: f64,
    /// |<from| U(t_ref) |target>|^2, exact.
    pub prob_backward: f64,
    /// prob_forward / prob_backward; None when the backward probability
    /// vanishes.
    pub probability_ratio: Option<f64>,
    /// 10 log10 of the probability ratio; decibels of directional contrast.
    /// None when the ratio is unavailable.
    pub db_asymmetry: Option<f64>,
}

/// Build the asymmetry report for one hop. The initial state must hold at
/// least one photon in cavity A (otherwise there is no forward hop). Valid
/// for every real coupling pair — the probabilities come from the numeric
/// propagator.
pub fn exchange_asymmetry(
    params: &ModelParams,
    from: FockState,
    reference_time: f64,
) -> Result<AsymmetryReport> {
    if !reference_time.is_finite() {
        return Err(Error::NonFinite(format!("reference time {reference_time}")));
    }
    if from.n_a == 0 {
        return Err(Error::Domain(format!(
            "no forward hop from ({}, {}): cavity A holds no photon",
            from.n_a, from.n_b
        )));
    }
    let target = FockState::new(from.n_a - 1, from.n_b + 1);
    // first-order amplitudes: <to| (1 - i H_I t) |from> = i t omega sqrt(..)
    let sqrt_factor = ((from.n_a as f64) * (from.n_b as f64 + 1.0)).sqrt();
    let amp_forward_per_time = C64::new(0.0, params.omega_ab() * sqrt_factor);
    // the reverse hop leaves from the forward target, so it carries the same
    // occupation factor: sqrt((n_A - 1 + 1)(n_B + 1))
    let amp_backward_per_time = C64::new(0.0, params.omega_ba() * sqrt_factor);
    let amplitude_ratio = (amp_backward_per_time.im != 0.0)
        .then(|| amp_forward_per_time.im / amp_backward_per_time.im);

    // exact sector probabilities from the numeric propagator
    let n_sector = from.total();
    let dim = n_sector as usize + 1;
    let from_pos = from.n_a as usize;
    let target_pos = target.n_a as usize;
    let mut init = vec![C64::new(0.0, 0.0); dim];
    init[from_pos] = C64::new(1.0, 0.0);
    let out_forward = propagator::propagate_sector(params, n_sector, reference_time, &init)?;
    let mut init = vec![C64::new(0.0, 0.0); dim];
    init[target_pos] = C64::new(1.0, 0.0);
    let out_backward = propagator::propagate_sector(params, n_sector, reference_time, &init)?;
    let prob_forward = out_forward[target_pos].norm_sqr();
    let prob_backward = out_backward[from_pos].norm_sqr();
    let probability_ratio = (prob_backward > 0.0).then(|| prob_forward / prob_backward);
    let db_asymmetry = probability_ratio
        .filter(|r| *r > 0.0)
        .map(|r| 10.0 * r.log10());

    Ok(AsymmetryReport {
        from,
        forward_target: target,
        reference_time,
        amp_forward_per_time,
        amp_backward_per_time,
        amplitude_ratio,
        prob_forward,
        prob_backward,
        probability_ratio,
        db_asymmetry,
    })
}

/// Sample times for asymmetry identities: midpoints of an even subdivision
/// of one exchange period 2 pi / g_eff. Midpoints never coincide with the
/// exchange nodes sin(g_eff t) = 0, where the transition probabilities both
/// vanish and their ratio is undefined.
pub fn asymmetry_sampling_grid(g_eff: f64, samples: usize) -> Vec<f64> {
    let period = 2.0 * std::f64::consts::PI / g_eff;
    (0..samples)
        .map(|j| period * (j as f64 + 0.5) / (samples as f64 + 1.0))
        .collect()
}

/// A deliberately injected defect, used to demonstrate that the
/// verification checks actually bite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Fault {
    /// Rebuild the alpha-raising intercavity operator with a mismatched
    /// b^dag coefficient; the canonical-commutator check must then fail
    /// with residual |1 - (1/2)(1 + sqrt(omega_ba/omega_ab))|.
    AlphaPlusMiscoupling,
}

impl Fault {
    pub fn name(&self) -> &'static str {
        match self {
            Fault::AlphaPlusMiscoupling => "alpha_plus_miscoupling",
        }
    }
}

/// One named verification check with its measured residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: Option<String>,
}

impl CheckOutcome {
    fn new(name: &'static str, residual: f64, tolerance: f64) -> Self {
        CheckOutcome {
            name,
            residual,
            tolerance,
            passed: residual.is_finite() && residual <= tolerance,
            note: None,
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Outcome of a full verification run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub omega0: f64,
    pub omega_ab: f64,
    pub omega_ba: f64,
    pub n_total_max: u32,
    pub injected_fault: Option<&'static str>,
    /// Whether the reciprocal-limit regression block ran (it activates only
    /// when the couplings are exactly equal).
    pub reciprocal_block_active: bool,
    pub checks: Vec<CheckOutcome>,
    pub all_passed: bool,
}

impl VerificationReport {
    pub fn failed(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn find(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Run the full verification suite: every structural identity of the model,
/// the cross-route oracle agreements over the given time grid, and the
/// asymmetry identities. Requires the closed-form regime
/// omega_ab * omega_ba > 0 (the closed forms are half of every
/// cross-check). See [`run_verification_with`] to inject a fault.
pub fn run_verification(
    params: &ModelParams,
    n_total_max: u32,
    t_grid: &[f64],
) -> Result<VerificationReport> {
    run_verification_with(params, n_total_max, t_grid, None)
}

pub fn run_verification_with(
    params: &ModelParams,
    n_total_max: u32,
    t_grid: &[f64],
    fault: Option<Fault>,
) -> Result<VerificationReport> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParams("verification time grid is empty".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite("verification time grid".into()));
    }
    let g = params.g_eff()?;
    let r = params.coupling_ratio()?;
    let basis = FockBasis::new(n_total_max);
    let h = operators::hamiltonian(params, &basis, HamiltonianVariant::Nonreciprocal)?;
    let id = OperatorMatrix::identity(&basis);
    let mut checks = Vec::new();

    // --- static operator algebra ---------------------------------------
    {
        let a = operators::lowering_a(&basis);
        let b = operators::lowering_b(&basis);
        let a_dag = operators::raising_a(&basis);
        let b_dag = operators::raising_b(&basis);
        let res_a = operators::interior_max_abs(
            &(&operators::commutator(&a, &a_dag)? - &id),
            &basis,
            1,
        );
        let res_b = operators::interior_max_abs(
            &(&operators::commutator(&b, &b_dag)? - &id),
            &basis,
            1,
        );
        checks.push(CheckOutcome::new(
            "ladder_canonical_commutators",
            res_a.max(res_b),
            tolerances::ALGEBRAIC,
        ));

        let ab_dag = &a * &b_dag;
        let a_dag_b = &a_dag * &b;
        let comm = operators::commutator(&ab_dag, &a_dag_b)?;
        let imbalance = &operators::number_b(&basis) - &operators::number_a(&basis);
        checks.push(CheckOutcome::new(
            "exchange_commutator_identity",
            operators::interior_max_abs(&(&comm - &imbalance), &basis, 1),
            tolerances::ALGEBRAIC,
        ));
        let nested = operators::commutator(&ab_dag, &comm)?;
        let expected = ab_dag.scale(C64::new(-2.0, 0.0));
        checks.push(CheckOutcome::new(
            "nested_exchange_commutator",
            operators::interior_max_abs(&(&nested - &expected), &basis, 1),
            tolerances::ALGEBRAIC,
        ));
    }
    {
        let h0 = operators::free_hamiltonian(params, &basis);
        let hi = operators::interaction_hamiltonian(params, &basis);
        checks.push(CheckOutcome::new(
            "interaction_commutes_with_free_part",
            operators::commutator(&h0, &hi)?.max_abs(),
            tolerances::ALGEBRAIC,
        ));
        checks.push(CheckOutcome::new(
            "hamiltonian_conserves_total_number",
            operators::commutator(&h, &operators::number_total(&basis))?.max_abs(),
            tolerances::ALGEBRAIC,
        ));
    }
    {
        // the hermiticity defect has a closed form: |omega_ab - omega_ba|
        // times the largest exchange matrix element in the basis
        let defect = h.max_abs_diff(&h.dagger())?;
        let expected =
            (params.omega_ab() - params.omega_ba()).abs() * operators::exchange_ab(&basis).max_abs();
        checks.push(
            CheckOutcome::new(
                "hermiticity_defect_identity",
                (defect - expected).abs(),
                tolerances::ALGEBRAIC,
            )
            .with_note(format!("max-norm of H - H^dag = {defect:.6e}")),
        );
        checks.push(CheckOutcome::new(
            "pt_symmetry",
            operators::pt_conjugate(&h, &basis)?.max_abs_diff(&h)?,
            tolerances::ALGEBRAIC,
        ));
    }
    {
        let convention = match fault {
            Some(Fault::AlphaPlusMiscoupling) => AlphaRaiseConvention::MismatchedBCoefficient,
            None => AlphaRaiseConvention::Canonical,
        };
        let ops = operators::intercavity_ops_with(params, &basis, convention)?;
        let mut worst = 0.0f64;
        for (x, y, is_identity) in [
            (&ops.alpha_lower, &ops.alpha_raise, true),
            (&ops.beta_lower, &ops.beta_raise, true),
            (&ops.alpha_lower, &ops.beta_raise, false),
            (&ops.beta_lower, &ops.alpha_raise, false),
        ] {
            let comm = operators::commutator(x, y)?;
            let diff = if is_identity { &comm - &id } else { comm };
            worst = worst.max(operators::interior_max_abs(&diff, &basis, 1));
        }
        let mut outcome = CheckOutcome::new(
            "intercavity_canonical_commutators",
            worst,
            tolerances::ALGEBRAIC,
        );
        if fault == Some(Fault::AlphaPlusMiscoupling) {
            let predicted = (1.0 - 0.5 * (1.0 + (1.0 / r).sqrt())).abs();
            outcome = outcome.with_note(format!(
                "fault injected: mismatched alpha-raising b^dag coefficient; predicted residual {predicted:.6e}"
            ));
        }
        checks.push(outcome);
    }

    // --- closed form vs numeric routes over the grid --------------------
    {
        let mut worst = 0.0f64;
        for &t in t_grid {
            for kind in [
                LadderKind::LowerA,
                LadderKind::RaiseA,
                LadderKind::LowerB,
                LadderKind::RaiseB,
            ] {
                let numeric = propagator::heisenberg_numeric(params, t, &basis, kind)?;
                let closed = dynamics::closed_heisenberg_matrix(params, t, kind, &basis)?;
                worst = worst.max(operators::interior_max_abs(
                    &(&numeric - &closed),
                    &basis,
                    1,
                ));
            }
        }
        checks.push(CheckOutcome::new(
            "closed_vs_expm_heisenberg",
            worst,
            tolerances::ORACLE_AGREEMENT,
        ));
    }
    {
        // RK4 step density scaled with the integration span and the row
        // magnitude of the coefficient matrix
        let rate = params.omega0() + params.omega_ab().abs() + params.omega_ba().abs();
        let mut worst = 0.0f64;
        for &t in t_grid {
            let steps = ((t.abs() * rate * 400.0).ceil() as usize).max(1000);
            let numeric = propagator::integrate_coefficient_ode(params, t, steps)?;
            let closed = dynamics::heisenberg_coeffs(params, t)?;
            for (n, cl) in [
                (numeric.c_aa, closed.c_aa),
                (numeric.c_ab, closed.c_ab),
                (numeric.c_ba, closed.c_ba),
                (numeric.c_bb, closed.c_bb),
                (numeric.d_aa, closed.d_aa),
                (numeric.d_ab, closed.d_ab),
                (numeric.d_ba, closed.d_ba),
                (numeric.d_bb, closed.d_bb),
            ] {
                worst = worst.max((n - cl).norm());
            }
        }
        checks.push(CheckOutcome::new(
            "closed_vs_ode_coefficients",
            worst,
            tolerances::ODE_AGREEMENT,
        ));
    }

    // --- spectrum --------------------------------------------------------
    {
        let entries = dynamics::spectrum(params, n_total_max)?;
        let mut worst_energy = 0.0f64;
        let mut worst_imag = 0.0f64;
        for n in 0..=n_total_max {
            let numeric = propagator::numeric_sector_eigenvalues(params, n)?;
            let mut closed: Vec<f64> = entries
                .iter()
                .filter(|e| e.n_alpha + e.n_beta == n)
                .map(|e| e.energy)
                .collect();
            closed.sort_by(|x, y| x.partial_cmp(y).expect("finite energies"));
            for (ev, en) in numeric.iter().zip(&closed) {
                worst_energy = worst_energy.max((ev.re - en).abs());
                worst_imag = worst_imag.max(ev.im.abs());
            }
        }
        checks.push(CheckOutcome::new(
            "spectrum_sector_agreement",
            worst_energy,
            tolerances::SPECTRUM,
        ));
        checks.push(CheckOutcome::new(
            "spectrum_reality",
            worst_imag,
            tolerances::SPECTRUM,
        ));
    }

    // --- propagator structure ---------------------------------------------
    {
        // exp(-iHt) factorizes exactly into free and interaction parts
        // because [H_0, H_I] = 0; checked per sector block
        let minus_i = C64::new(0.0, -1.0);
        let h0 = operators::free_hamiltonian(params, &basis);
        let hi = operators::interaction_hamiltonian(params, &basis);
        let mut worst = 0.0f64;
        for &t in t_grid {
            for sector in basis.sectors() {
                let view = |op: &OperatorMatrix| {
                    op.matrix()
                        .view((sector.offset, sector.offset), (sector.dim, sector.dim))
                        .into_owned()
                };
                let full = propagator::matrix_exponential(&view(&h).map(|z| minus_i * z * t))?;
                let free = propagator::matrix_exponential(&view(&h0).map(|z| minus_i * z * t))?;
                let inter = propagator::matrix_exponential(&view(&hi).map(|z| minus_i * z * t))?;
                let residual = (&full - &(free * inter))
                    .iter()
                    .fold(0.0f64, |m, z| m.max(z.norm()));
                worst = worst.max(residual);
            }
        }
        checks.push(CheckOutcome::new(
            "free_interaction_factorization",
            worst,
            tolerances::FACTORIZATION,
        ));
    }
    {
        // first-order short-time amplitude against the full propagator
        let dt = 1e-4 / params.omega_ab().abs().max(params.omega_ba().abs());
        let pairs = [
            (FockState::new(1, 0), FockState::new(0, 1)),
            (FockState::new(1, 0), FockState::new(1, 0)),
            (FockState::new(1, 1), FockState::new(2, 0)),
            (FockState::new(2, 0), FockState::new(1, 1)),
        ];
        let mut worst = 0.0f64;
        for (from, to) in pairs {
            let n = from.total();
            let dim = n as usize + 1;
            let mut init = vec![C64::new(0.0, 0.0); dim];
            init[from.n_a as usize] = C64::new(1.0, 0.0);
            let out = propagator::propagate_sector(params, n, dt, &init)?;
            let numeric = out[to.n_a as usize];
            let closed = dynamics::small_time_amplitude_with_free_phase(params, from, to, dt);
            let scale = numeric.norm().max(f64::MIN_POSITIVE);
            worst = worst.max((numeric - closed).norm() / scale);
        }
        checks.push(CheckOutcome::new(
            "first_order_short_time",
            worst,
            tolerances::FIRST_ORDER_RELATIVE,
        ));
    }
    {
        // U(t)^dag U(t) - 1 on the one-photon sector at the quarter period:
        // max(r, 1/r) - 1 away from reciprocity, zero at it
        let sector_basis = FockBasis::new(1);
        let t_quarter = std::f64::consts::FRAC_PI_2 / g;
        let prop = Propagator::new(params, &sector_basis, t_quarter)?;
        let expected = r.max(1.0 / r) - 1.0;
        checks.push(
            CheckOutcome::new(
                "nonunitarity_dichotomy",
                (prop.nonunitarity - expected).abs(),
                tolerances::SPECTRUM,
            )
            .with_note(format!(
                "measured {:.6e}, predicted {expected:.6e}",
                prop.nonunitarity
            )),
        );
        let mid = t_grid[t_grid.len() / 2];
        let prop = Propagator::new(params, &basis, mid)?;
        checks.push(CheckOutcome::new(
            "propagator_inverse_consistency",
            prop.inverse_residual(),
            tolerances::SIMILARITY,
        ));
    }

    // --- conservation and transfer over the grid -------------------------
    {
        let n_op = operators::number_total(&basis);
        let mut worst_op = 0.0f64;
        for &t in t_grid {
            let na = dynamics::photon_number_operator_t(params, t, dynamics::Cavity::A, &basis)?;
            let nb = dynamics::photon_number_operator_t(params, t, dynamics::Cavity::B, &basis)?;
            worst_op = worst_op.max((&(&na + &nb) - &n_op).max_abs());
        }
        checks.push(CheckOutcome::new(
            "number_operator_completeness",
            worst_op,
            tolerances::ALGEBRAIC,
        ));

        let mut worst_comm = 0.0f64;
        for &t in t_grid.iter().step_by((t_grid.len() / 8).max(1)) {
            let a_t = propagator::heisenberg_numeric(params, t, &basis, LadderKind::LowerA)?;
            let a_dag_t = propagator::heisenberg_numeric(params, t, &basis, LadderKind::RaiseA)?;
            let comm = operators::commutator(&a_t, &a_dag_t)?;
            worst_comm = worst_comm.max(operators::interior_max_abs(&(&comm - &id), &basis, 2));
        }
        checks.push(CheckOutcome::new(
            "evolved_commutator_preservation",
            worst_comm,
            tolerances::ALGEBRAIC,
        ));

        // single-photon Rabi transfer: closed means against the numeric
        // route over the grid, and the checkpoint at the quarter period
        let initial = FockState::new(1, 0);
        let series = propagator::evolve_observables(params, initial, t_grid, &basis)?;
        let mut worst_rabi = 0.0f64;
        let mut worst_cons = 0.0f64;
        for (&t, rec) in series.times.iter().zip(&series.values) {
            let (mean_a, mean_b) = dynamics::expected_photons(params, initial, t)?;
            worst_rabi = worst_rabi
                .max((rec.mean_n_a - mean_a).abs())
                .max((rec.mean_n_b - mean_b).abs());
            worst_cons = worst_cons
                .max(rec.conservation_residual)
                .max((mean_a + mean_b - 1.0).abs());
        }
        checks.push(CheckOutcome::new(
            "mean_photon_conservation",
            worst_cons,
            tolerances::ALGEBRAIC,
        ));
        checks.push(CheckOutcome::new(
            "rabi_transfer_cross_route",
            worst_rabi,
            tolerances::ORACLE_AGREEMENT,
        ));
        let t_quarter = std::f64::consts::FRAC_PI_2 / g;
        let (mean_a, mean_b) = dynamics::expected_photons(params, initial, t_quarter)?;
        checks.push(CheckOutcome::new(
            "rabi_quarter_period_checkpoint",
            mean_a.abs().max((mean_b - 1.0).abs()),
            tolerances::ALGEBRAIC,
        ));
    }

    // --- similarity map ---------------------------------------------------
    checks.push(CheckOutcome::new(
        "similarity_conjugation",
        similarity_conjugation_residual(params, &basis)?,
        tolerances::SIMILARITY,
    ));

    // --- asymmetry identities ----------------------------------------------
    {
        let from = FockState::new(1, 0);
        let report = exchange_asymmetry(params, from, t_grid[t_grid.len() / 2])?;
        let ratio_residual = report
            .amplitude_ratio
            .map(|ratio| (ratio - params.omega_ab() / params.omega_ba()).abs())
            .unwrap_or(f64::INFINITY);
        checks.push(CheckOutcome::new(
            "asymmetry_amplitude_ratio",
            ratio_residual,
            0.0,
        ));

        let expected_prob_ratio = r * r;
        let mut worst = 0.0f64;
        let mut worst_db = 0.0f64;
        for &t in t_grid {
            let rep = exchange_asymmetry(params, from, t)?;
            let measured = rep.probability_ratio.unwrap_or(f64::INFINITY);
            worst = worst.max((measured - expected_prob_ratio).abs());
            let rep_swapped = exchange_asymmetry(&params.swapped(), from, t)?;
            match (rep.db_asymmetry, rep_swapped.db_asymmetry) {
                (Some(db), Some(db_swapped)) => {
                    worst_db = worst_db.max((db + db_swapped).abs());
                }
                _ => worst_db = f64::INFINITY,
            }
        }
        checks.push(
            CheckOutcome::new("asymmetry_probability_ratio", worst, tolerances::ASYMMETRY)
                .with_note(format!("expected ratio {expected_prob_ratio}")),
        );
        checks.push(CheckOutcome::new(
            "asymmetry_swap_antisymmetry",
            worst_db,
            tolerances::ASYMMETRY,
        ));
    }

    // --- reciprocal-limit regression ---------------------------------------
    let reciprocal_block_active = params.is_reciprocal();
    if reciprocal_block_active {
        let mut worst = 0.0f64;
        for &t in t_grid {
            let k = dynamics::heisenberg_coeffs(params, t)?;
            let (c_aa, c_ab) = reciprocal::coefficient_pair(params.omega0(), g, t);
            worst = worst
                .max((k.c_aa - c_aa).norm())
                .max((k.c_ab - c_ab).norm())
                .max((k.c_ba - c_ab).norm())
                .max((k.c_bb - c_aa).norm())
                // raising coefficients must be exact conjugates here
                .max((k.d_aa - c_aa.conj()).norm())
                .max((k.d_ab - c_ab.conj()).norm());
            let (mean_a, mean_b) =
                dynamics::expected_photons(params, FockState::new(1, 0), t)?;
            let (ref_a, ref_b) = reciprocal::mean_photons(g, 1, 0, t);
            worst = worst.max((mean_a - ref_a).abs()).max((mean_b - ref_b).abs());
        }
        let (w_alpha, w_beta) = dynamics::eigenfrequencies(params)?;
        worst = worst
            .max((w_alpha - (params.omega0() - g)).abs())
            .max((w_beta - (params.omega0() + g)).abs());
        let dt = 1e-4 / g;
        for (from, to) in [
            (FockState::new(1, 0), FockState::new(0, 1)),
            (FockState::new(2, 1), FockState::new(1, 2)),
            (FockState::new(1, 1), FockState::new(1, 1)),
        ] {
            let general = dynamics::small_time_amplitude(params, from, to, dt);
            let reference = reciprocal::first_order_amplitude(g, from, to, dt);
            worst = worst.max((general - reference).norm());
        }
        checks.push(CheckOutcome::new(
            "reciprocal_regression",
            worst,
            tolerances::RECIPROCAL_REGRESSION,
        ));
    }

    let all_passed = checks.iter().all(|c| c.passed);
    Ok(VerificationReport {
        omega0: params.omega0(),
        omega_ab: params.omega_ab(),
        omega_ba: params.omega_ba(),
        n_total_max,
        injected_fault: fault.map(|f| f.name()),
        reciprocal_block_active,
        checks,
        all_passed,
    })
}

/// Specialized reciprocal-limit (equal-coupling) reference formulas. These
/// are written directly from the hermitian beam-splitter solution and share
/// no code with the general-coupling engine they are used to check.
mod reciprocal {
    use super::{C64, FockState};

    /// (c_aa, c_ab) of the hermitian solution:
    /// a(t) = [cos(g t) a0 + i sin(g t) b0] e^(-i omega0 t); by symmetry
    /// c_bb = c_aa and c_ba = c_ab.
    pub fn coefficient_pair(omega0: f64, g: f64, t: f64) -> (C64, C64) {
        let phase = C64::from_polar(1.0, -omega0 * t);
        (
            phase * C64::new((g * t).cos(), 0.0),
            phase * C64::new(0.0, (g * t).sin()),
        )
    }

    /// Mean photon numbers from |n_A, n_B> under equal couplings.
    pub fn mean_photons(g: f64, n_a: u32, n_b: u32, t: f64) -> (f64, f64) {
        let (s2, c2) = ((g * t).sin().powi(2), (g * t).cos().powi(2));
        let (n_a, n_b) = (n_a as f64, n_b as f64);
        (n_a * c2 + n_b * s2, n_a * s2 + n_b * c2)
    }

    /// First-order short-time amplitude under equal couplings:
    /// delta + i t g (sqrt(n_A (n_B + 1)) delta_hop + sqrt((n_A + 1) n_B) delta_reverse).
    pub fn first_order_amplitude(g: f64, from: FockState, to: FockState, t: f64) -> C64 {
        let mut amp = if from == to {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        };
        if from.n_a > 0 && to == FockState::new(from.n_a - 1, from.n_b + 1) {
            let factor = ((from.n_a as f64) * (from.n_b as f64 + 1.0)).sqrt();
            amp += C64::new(0.0, t * g * factor);
        }
        if from.n_b > 0 && to == FockState::new(from.n_a + 1, from.n_b - 1) {
            let factor = ((from.n_a as f64 + 1.0) * (from.n_b as f64)).sqrt();
            amp += C64::new(0.0, t * g * factor);
        }
        amp
    }
}
