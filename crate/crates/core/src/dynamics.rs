//! Closed-form Heisenberg dynamics.
//!
//! For omega_ab * omega_ba > 0 the coupled Heisenberg equations for the two
//! lowering operators decouple into an effective Rabi problem with exchange
//! frequency g_eff = sqrt(omega_ab * omega_ba):
//!
//! ```text
//! a(t) = [cos(g t) a0 + i (omega_ba / g) sin(g t) b0] e^(-i omega0 t)
//! b(t) = [i (omega_ab / g) sin(g t) a0 + cos(g t) b0] e^(-i omega0 t)
//! ```
//!
//! and the raising operators evolve with the *transposed* coupling weights
//! and the opposite free phase — away from the reciprocal limit they are not
//! the conjugates of the lowering solutions, which is exactly where the
//! directional asymmetry of the mirror lives. Everything in this module is
//! evaluated from these closed forms; the independent numeric routes live in
//! [`crate::propagator`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{FockBasis, FockState};
use crate::operators::{
    self, C64, ModelParams, OperatorMatrix,
};

/// Which cavity an observable refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Cavity {
    A,
    B,
}

/// One of the four time-evolved ladder operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    LowerA,
    RaiseA,
    LowerB,
    RaiseB,
}

/// Normal-mode eigenfrequencies (omega_alpha, omega_beta) =
/// (omega0 - g_eff, omega0 + g_eff).
pub fn eigenfrequencies(params: &ModelParams) -> Result<(f64, f64)> {
    let g = params.g_eff()?;
    Ok((params.omega0() - g, params.omega0() + g))
}

/// The eight closed-form coefficients of the Heisenberg solutions at one
/// time: a(t) = c_aa a0 + c_ab b0 (likewise b(t) with the c_b* row), and
/// a^dag(t) = d_aa a0^dag + d_ab b0^dag (likewise b^dag(t)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeisenbergCoeffs {
    pub time: f64,
    pub c_aa: C64,
    pub c_ab: C64,
    pub c_ba: C64,
    pub c_bb: C64,
    pub d_aa: C64,
    pub d_ab: C64,
    pub d_ba: C64,
    pub d_bb: C64,
}

impl HeisenbergCoeffs {
    /// Residual of the equal-time commutator [a(t), a^dag(t)] - 1, which the
    /// exact solution keeps at zero for all times and couplings.
    pub fn commutator_aa(&self) -> C64 {
        self.c_aa * self.d_aa + self.c_ab * self.d_ab
    }

    /// Residual core of [b(t), b^dag(t)].
    pub fn commutator_bb(&self) -> C64 {
        self.c_ba * self.d_ba + self.c_bb * self.d_bb
    }

    /// [a(t), b^dag(t)], exactly zero for the true solution.
    pub fn commutator_ab(&self) -> C64 {
        self.c_aa * self.d_ba + self.c_ab * self.d_bb
    }

    /// [b(t), a^dag(t)], exactly zero for the true solution.
    pub fn commutator_ba(&self) -> C64 {
        self.c_ba * self.d_aa + self.c_bb * self.d_ab
    }

    /// Worst deviation of the four equal-time commutators from their
    /// canonical values.
    pub fn max_commutation_residual(&self) -> f64 {
        let one = C64::new(1.0, 0.0);
        [
            self.commutator_aa() - one,
            self.commutator_bb() - one,
            self.commutator_ab(),
            self.commutator_ba(),
        ]
        .iter()
        .fold(0.0f64, |m, z| m.max(z.norm()))
    }
}

/// Evaluate the closed-form coefficients at time t. Requires the
/// real-spectrum regime omega_ab * omega_ba > 0.
pub fn heisenberg_coeffs(params: &ModelParams, t: f64) -> Result<HeisenbergCoeffs> {
    if !t.is_finite() {
        return Err(Error::NonFinite(format!("time t = {t}")));
    }
    let g = params.g_eff()?;
    let (s, c) = (g * t).sin_cos();
    let cos = C64::new(c, 0.0);
    // e^(-i omega0 t) and its exact conjugate, so products of a d_* with the
    // matching c_* cancel the free phase to machine precision.
    let phase_m = C64::from_polar(1.0, -params.omega0() * t);
    let phase_p = phase_m.conj();
    let i_sin_ba = C64::new(0.0, params.omega_ba() / g * s);
    let i_sin_ab = C64::new(0.0, params.omega_ab() / g * s);
    Ok(HeisenbergCoeffs {
        time: t,
        c_aa: cos * phase_m,
        c_ab: i_sin_ba * phase_m,
        c_ba: i_sin_ab * phase_m,
        c_bb: cos * phase_m,
        d_aa: cos * phase_p,
        d_ab: -i_sin_ab * phase_p,
        d_ba: -i_sin_ba * phase_p,
        d_bb: cos * phase_p,
    })
}

/// Matrix of one time-evolved ladder operator over a truncated basis, built
/// as the closed-form linear combination of the t = 0 ladder matrices.
pub fn closed_heisenberg_matrix(
    params: &ModelParams,
    t: f64,
    kind: LadderKind,
    basis: &FockBasis,
) -> Result<OperatorMatrix> {
    let k = heisenberg_coeffs(params, t)?;
    Ok(match kind {
        LadderKind::LowerA => {
            &operators::lowering_a(basis).scale(k.c_aa) + &operators::lowering_b(basis).scale(k.c_ab)
        }
        LadderKind::LowerB => {
            &operators::lowering_a(basis).scale(k.c_ba) + &operators::lowering_b(basis).scale(k.c_bb)
        }
        LadderKind::RaiseA => {
            &operators::raising_a(basis).scale(k.d_aa) + &operators::raising_b(basis).scale(k.d_ab)
        }
        LadderKind::RaiseB => {
            &operators::raising_a(basis).scale(k.d_ba) + &operators::raising_b(basis).scale(k.d_bb)
        }
    })
}

/// Time-evolved photon-number operator N_A(t) or N_B(t).
///
/// Expanding a^dag(t) a(t) with the closed-form coefficients gives
///
/// ```text
/// N_A(t) = cos^2 N_A + sin^2 N_B
///          + (i cos sin / g)(omega_ba a^dag b - omega_ab a b^dag)
/// ```
///
/// (arguments g t suppressed), and N_B(t) is the complement that keeps
/// N_A(t) + N_B(t) = N. Every term conserves total photon number, so the
/// matrix is built from the within-sector exchange operators and is exact in
/// all sectors of the truncated basis.
pub fn photon_number_operator_t(
    params: &ModelParams,
    t: f64,
    cavity: Cavity,
    basis: &FockBasis,
) -> Result<OperatorMatrix> {
    if !t.is_finite() {
        return Err(Error::NonFinite(format!("time t = {t}")));
    }
    let g = params.g_eff()?;
    let (s, c) = (g * t).sin_cos();
    let (cos2, sin2) = (C64::new(c * c, 0.0), C64::new(s * s, 0.0));
    let cross = C64::new(0.0, c * s / g);
    let (w_diag_a, w_diag_b, w_cross) = match cavity {
        Cavity::A => (cos2, sin2, cross),
        Cavity::B => (sin2, cos2, -cross),
    };
    let diag = &operators::number_a(basis).scale(w_diag_a)
        + &operators::number_b(basis).scale(w_diag_b);
    let exch = &operators::exchange_ba(basis).scale(w_cross * params.omega_ba())
        + &operators::exchange_ab(basis).scale(-w_cross * params.omega_ab());
    Ok(&diag + &exch)
}

/// Mean photon numbers (<N_A>, <N_B>) at time t for the initial Fock state
/// |n_A, n_B>: a Rabi oscillation n_A cos^2(g t) + n_B sin^2(g t) and its
/// complement. Computed so the two means sum to n_A + n_B exactly.
pub fn expected_photons(
    params: &ModelParams,
    initial: FockState,
    t: f64,
) -> Result<(f64, f64)> {
    if !t.is_finite() {
        return Err(Error::NonFinite(format!("time t = {t}")));
    }
    let g = params.g_eff()?;
    let s2 = (g * t).sin().powi(2);
    let (n_a, n_b) = (initial.n_a as f64, initial.n_b as f64);
    let mean_a = n_a + s2 * (n_b - n_a);
    let mean_b = n_b + s2 * (n_a - n_b);
    Ok((mean_a, mean_b))
}

/// A target Fock state with its complex amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedState {
    pub amplitude: C64,
    pub state: FockState,
}

/// Apply one time-evolved ladder operator to a Fock state, returning the at
/// most two branches with nonzero amplitude (the surviving A-branch first).
/// Pure occupation-number algebra — no basis truncation is involved.
pub fn apply_ladder_t(
    params: &ModelParams,
    t: f64,
    kind: LadderKind,
    state: FockState,
) -> Result<Vec<WeightedState>> {
    let k = heisenberg_coeffs(params, t)?;
    let (n_a, n_b) = (state.n_a, state.n_b);
    let mut out = Vec::with_capacity(2);
    let mut push = |amp: C64, target: FockState| {
        if amp != C64::new(0.0, 0.0) {
            out.push(WeightedState {
                amplitude: amp,
                state: target,
            });
        }
    };
    match kind {
        LadderKind::LowerA | LadderKind::LowerB => {
            let (w_a, w_b) = if kind == LadderKind::LowerA {
                (k.c_aa, k.c_ab)
            } else {
                (k.c_ba, k.c_bb)
            };
            if n_a > 0 {
                push(
                    w_a * C64::new((n_a as f64).sqrt(), 0.0),
                    FockState::new(n_a - 1, n_b),
                );
            }
            if n_b > 0 {
                push(
                    w_b * C64::new((n_b as f64).sqrt(), 0.0),
                    FockState::new(n_a, n_b - 1),
                );
            }
        }
        LadderKind::RaiseA | LadderKind::RaiseB => {
            let (w_a, w_b) = if kind == LadderKind::RaiseA {
                (k.d_aa, k.d_ab)
            } else {
                (k.d_ba, k.d_bb)
            };
            push(
                w_a * C64::new((n_a as f64 + 1.0).sqrt(), 0.0),
                FockState::new(n_a + 1, n_b),
            );
            push(
                w_b * C64::new((n_b as f64 + 1.0).sqrt(), 0.0),
                FockState::new(n_a, n_b + 1),
            );
        }
    }
    Ok(out)
}

/// Apply the interaction Hamiltonian H_I to a Fock state:
///
/// ```text
/// H_I |n_A, n_B> = -omega_ab sqrt(n_A (n_B + 1)) |n_A - 1, n_B + 1>
///                  -omega_ba sqrt((n_A + 1) n_B) |n_A + 1, n_B - 1>
/// ```
///
/// Valid for every real coupling pair (no closed-form domain restriction).
pub fn apply_interaction(params: &ModelParams, state: FockState) -> Vec<WeightedState> {
    let (n_a, n_b) = (state.n_a as f64, state.n_b as f64);
    let mut out = Vec::with_capacity(2);
    if state.n_a > 0 {
        let amp = -params.omega_ab() * (n_a * (n_b + 1.0)).sqrt();
        if amp != 0.0 {
            out.push(WeightedState {
                amplitude: C64::new(amp, 0.0),
                state: FockState::new(state.n_a - 1, state.n_b + 1),
            });
        }
    }
    if state.n_b > 0 {
        let amp = -params.omega_ba() * ((n_a + 1.0) * n_b).sqrt();
        if amp != 0.0 {
            out.push(WeightedState {
                amplitude: C64::new(amp, 0.0),
                state: FockState::new(state.n_a + 1, state.n_b - 1),
            });
        }
    }
    out
}

/// First-order short-time transition amplitude of the interaction picture,
/// <to| 1 - i H_I t |from>:
///
/// ```text
/// delta_{from,to} + i t [ omega_ab sqrt(n_A (n_B + 1)) (to = A->B hop)
///                       + omega_ba sqrt((n_A + 1) n_B) (to = B->A hop) ]
/// ```
///
/// The free sector phase e^(-i omega0 (N + 1) t) is factored out; use
/// [`small_time_amplitude_with_free_phase`] to keep it.
pub fn small_time_amplitude(
    params: &ModelParams,
    from: FockState,
    to: FockState,
    t: f64,
) -> C64 {
    let mut amp = if from == to {
        C64::new(1.0, 0.0)
    } else {
        C64::new(0.0, 0.0)
    };
    for branch in apply_interaction(params, from) {
        if branch.state == to {
            // -i t <to| H_I |from>
            amp += C64::new(0.0, -t) * branch.amplitude;
        }
    }
    amp
}

/// Variant of [`small_time_amplitude`] that keeps the free evolution phase
/// e^(-i omega0 (N + 1) t) of the shared sector. Zero when the two states
/// sit in different sectors (the model conserves N).
pub fn small_time_amplitude_with_free_phase(
    params: &ModelParams,
    from: FockState,
    to: FockState,
    t: f64,
) -> C64 {
    if from.total() != to.total() {
        return C64::new(0.0, 0.0);
    }
    let phase = C64::from_polar(1.0, -params.omega0() * (from.total() as f64 + 1.0) * t);
    phase * small_time_amplitude(params, from, to, t)
}

/// One normal-mode occupation level of the closed-form spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub n_alpha: u32,
    pub n_beta: u32,
    /// E = omega_alpha n_alpha + omega_beta n_beta + omega0.
    pub energy: f64,
    /// Strictly negative energy — the rotating-wave form has left its
    /// domain of validity for this level.
    pub negative_energy: bool,
}

/// Closed-form spectrum over all normal-mode occupations with
/// n_alpha + n_beta <= n_total_max, in canonical order (ascending total,
/// then ascending n_alpha).
pub fn spectrum(params: &ModelParams, n_total_max: u32) -> Result<Vec<SpectrumEntry>> {
    let (omega_alpha, omega_beta) = eigenfrequencies(params)?;
    let mut entries = Vec::with_capacity(FockBasis::dimension_for(n_total_max));
    for n_total in 0..=n_total_max {
        for n_alpha in 0..=n_total {
            let n_beta = n_total - n_alpha;
            let energy =
                omega_alpha * n_alpha as f64 + omega_beta * n_beta as f64 + params.omega0();
            entries.push(SpectrumEntry {
                n_alpha,
                n_beta,
                energy,
                negative_energy: energy < 0.0,
            });
        }
    }
    Ok(entries)
}
