//! Operator algebra on the truncated two-mode Fock basis.
//!
//! Builds the ladder operators, the model Hamiltonian
//! H = omega0 (N + 1) - (omega_ab a b^dag + omega_ba a^dag b), number and
//! excitation-imbalance operators, the intercavity normal-mode ladder
//! operators, plus the commutator and PT-conjugation helpers the
//! verification suite is built on.
//!
//! Conventions: hbar = 1 throughout; the two couplings are independent real
//! numbers, equal exactly in the reciprocal (hermitian) limit. The model is
//! non-hermitian whenever omega_ab != omega_ba but keeps a real spectrum as
//! long as omega_ab * omega_ba > 0.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{FockBasis, FockState};

/// Shorthand for the complex scalar type used everywhere.
pub type C64 = Complex64;

const ONE: C64 = C64::new(1.0, 0.0);

/// Model parameters: the common cavity frequency and the two directional
/// couplings through the mirror. Couplings are real; the
/// non-hermitian-but-real-spectrum regime is omega_ab * omega_ba > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    omega0: f64,
    omega_ab: f64,
    omega_ba: f64,
}

impl ModelParams {
    /// Validated constructor: omega0 must be positive and finite, couplings
    /// finite (any sign; zero allowed — closed-form paths check their own
    /// domain).
    pub fn new(omega0: f64, omega_ab: f64, omega_ba: f64) -> Result<Self> {
        if !omega0.is_finite() || !omega_ab.is_finite() || !omega_ba.is_finite() {
            return Err(Error::NonFinite("model parameter set".into()));
        }
        if omega0 <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "omega0 must be positive, got {omega0}"
            )));
        }
        Ok(ModelParams {
            omega0,
            omega_ab,
            omega_ba,
        })
    }

    /// Reciprocal (hermitian) limit: both couplings equal to g.
    pub fn hermitian(omega0: f64, g: f64) -> Result<Self> {
        ModelParams::new(omega0, g, g)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn omega_ab(&self) -> f64 {
        self.omega_ab
    }

    pub fn omega_ba(&self) -> f64 {
        self.omega_ba
    }

    /// The product omega_ab * omega_ba; positive in the real-spectrum regime.
    pub fn coupling_product(&self) -> f64 {
        self.omega_ab * self.omega_ba
    }

    /// Effective exchange frequency g_eff = sqrt(omega_ab * omega_ba).
    /// Errors when the product is not strictly positive — outside that
    /// domain the closed forms do not apply (the numeric propagator does).
    pub fn g_eff(&self) -> Result<f64> {
        let p = self.coupling_product();
        if p > 0.0 {
            Ok(p.sqrt())
        } else {
            Err(Error::Domain(format!(
                "omega_ab * omega_ba must be > 0 for closed-form dynamics, got {p}"
            )))
        }
    }

    /// The ratio omega_ab / omega_ba, defined on the same domain as g_eff
    /// (both couplings nonzero and of equal sign), where it is positive.
    pub fn coupling_ratio(&self) -> Result<f64> {
        self.g_eff()?;
        Ok(self.omega_ab / self.omega_ba)
    }

    /// Exact coupling equality; the hermitian limit.
    pub fn is_reciprocal(&self) -> bool {
        self.omega_ab == self.omega_ba
    }

    /// Same frequencies with the two couplings exchanged.
    pub fn swapped(&self) -> Self {
        ModelParams {
            omega0: self.omega0,
            omega_ab: self.omega_ba,
            omega_ba: self.omega_ab,
        }
    }
}

/// A dense complex matrix tagged with the basis cutoff it was built over, so
/// operators from different truncations cannot be silently combined.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    basis_tag: u32,
    mat: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn zeros(basis: &FockBasis) -> Self {
        OperatorMatrix {
            basis_tag: basis.n_total_max(),
            mat: DMatrix::zeros(basis.dim(), basis.dim()),
        }
    }

    pub fn identity(basis: &FockBasis) -> Self {
        OperatorMatrix {
            basis_tag: basis.n_total_max(),
            mat: DMatrix::identity(basis.dim(), basis.dim()),
        }
    }

    /// Wrap a raw matrix, checking its dimension against the basis.
    pub fn from_matrix(basis: &FockBasis, mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != basis.dim() || mat.ncols() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                got: mat.nrows().max(mat.ncols()),
            });
        }
        Ok(OperatorMatrix {
            basis_tag: basis.n_total_max(),
            mat,
        })
    }

    pub fn basis_tag(&self) -> u32 {
        self.basis_tag
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.mat[(row, col)]
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        OperatorMatrix {
            basis_tag: self.basis_tag,
            mat: self.mat.adjoint(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        OperatorMatrix {
            basis_tag: self.basis_tag,
            mat: self.mat.map(|x| factor * x),
        }
    }

    /// Largest entry magnitude (max norm).
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().fold(0.0f64, |m, x| m.max(x.norm()))
    }

    /// Max-norm distance to another operator over the same basis.
    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> Result<f64> {
        check_tags(self, other)?;
        Ok(self
            .mat
            .iter()
            .zip(other.mat.iter())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).norm())))
    }

    fn same_shape(&self, other: &OperatorMatrix) -> bool {
        self.basis_tag == other.basis_tag
    }
}

fn check_tags(x: &OperatorMatrix, y: &OperatorMatrix) -> Result<()> {
    if x.same_shape(y) {
        Ok(())
    } else {
        Err(Error::BasisMismatch(x.basis_tag, y.basis_tag))
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $op:tt) => {
        impl std::ops::$trait for &OperatorMatrix {
            type Output = OperatorMatrix;
            fn $method(self, rhs: &OperatorMatrix) -> OperatorMatrix {
                assert_eq!(
                    self.basis_tag, rhs.basis_tag,
                    "operators built over different bases"
                );
                OperatorMatrix {
                    basis_tag: self.basis_tag,
                    mat: &self.mat $op &rhs.mat,
                }
            }
        }
    };
}

binary_op!(Add, add, +);
binary_op!(Sub, sub, -);
binary_op!(Mul, mul, *);

impl std::ops::Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        self.scale(C64::new(-1.0, 0.0))
    }
}

/// Commutator [x, y] = xy - yx; errors when the operands were built over
/// different bases.
pub fn commutator(x: &OperatorMatrix, y: &OperatorMatrix) -> Result<OperatorMatrix> {
    check_tags(x, y)?;
    Ok(&(x * y) - &(y * x))
}

/// Annihilation operator for cavity A: <n_A - 1, n_B| a |n_A, n_B> = sqrt(n_A).
pub fn lowering_a(basis: &FockBasis) -> OperatorMatrix {
    ladder(basis, |s| {
        (s.n_a > 0).then(|| (FockState::new(s.n_a - 1, s.n_b), (s.n_a as f64).sqrt()))
    })
}

/// Annihilation operator for cavity B.
pub fn lowering_b(basis: &FockBasis) -> OperatorMatrix {
    ladder(basis, |s| {
        (s.n_b > 0).then(|| (FockState::new(s.n_a, s.n_b - 1), (s.n_b as f64).sqrt()))
    })
}

/// Creation operator for cavity A (adjoint of the truncated lowering
/// operator; its top-sector columns vanish because the raised states fall
/// outside the cutoff).
pub fn raising_a(basis: &FockBasis) -> OperatorMatrix {
    lowering_a(basis).dagger()
}

/// Creation operator for cavity B.
pub fn raising_b(basis: &FockBasis) -> OperatorMatrix {
    lowering_b(basis).dagger()
}

fn ladder<F>(basis: &FockBasis, image: F) -> OperatorMatrix
where
    F: Fn(FockState) -> Option<(FockState, f64)>,
{
    let mut op = OperatorMatrix::zeros(basis);
    for (col, &s) in basis.states().iter().enumerate() {
        if let Some((target, amp)) = image(s) {
            if let Some(row) = basis.index_of(target) {
                op.mat[(row, col)] = C64::new(amp, 0.0);
            }
        }
    }
    op
}

/// Photon-number operator of cavity A (diagonal).
pub fn number_a(basis: &FockBasis) -> OperatorMatrix {
    diagonal(basis, |s| s.n_a as f64)
}

/// Photon-number operator of cavity B (diagonal).
pub fn number_b(basis: &FockBasis) -> OperatorMatrix {
    diagonal(basis, |s| s.n_b as f64)
}

/// Total photon number N = N_A + N_B (diagonal).
pub fn number_total(basis: &FockBasis) -> OperatorMatrix {
    diagonal(basis, |s| s.total() as f64)
}

fn diagonal(basis: &FockBasis, value: impl Fn(FockState) -> f64) -> OperatorMatrix {
    let mut op = OperatorMatrix::zeros(basis);
    for (i, &s) in basis.states().iter().enumerate() {
        op.mat[(i, i)] = C64::new(value(s), 0.0);
    }
    op
}

/// Which Hamiltonian to build from a parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HamiltonianVariant {
    /// The full model with independent couplings from the parameter set.
    Nonreciprocal,
    /// The reciprocal limit with both couplings set to g (omega0 is taken
    /// from the parameter set).
    Hermitian { g: f64 },
}

/// Free Hamiltonian H_0 = omega0 (N + 1); the +1 is the two-mode vacuum
/// energy (1/2 per cavity).
pub fn free_hamiltonian(params: &ModelParams, basis: &FockBasis) -> OperatorMatrix {
    diagonal(basis, |s| params.omega0 * (s.total() as f64 + 1.0))
}

/// The photon-exchange operator a b^dag moving one photon from A to B:
/// |n_A, n_B> -> sqrt(n_A (n_B + 1)) |n_A - 1, n_B + 1>.
///
/// It conserves the total photon number, so the truncated operator's matrix
/// elements are written directly (the image never leaves a sector). Forming
/// the same product from truncated ladder factors would instead zero the
/// topmost sector, because the intermediate raised state falls outside the
/// cutoff.
pub fn exchange_ab(basis: &FockBasis) -> OperatorMatrix {
    ladder(basis, |s| {
        (s.n_a > 0).then(|| {
            let amp = ((s.n_a as f64) * (s.n_b as f64 + 1.0)).sqrt();
            (FockState::new(s.n_a - 1, s.n_b + 1), amp)
        })
    })
}

/// The photon-exchange operator a^dag b moving one photon from B to A:
/// |n_A, n_B> -> sqrt((n_A + 1) n_B) |n_A + 1, n_B - 1>. Within-sector exact,
/// like [`exchange_ab`].
pub fn exchange_ba(basis: &FockBasis) -> OperatorMatrix {
    ladder(basis, |s| {
        (s.n_b > 0).then(|| {
            let amp = ((s.n_a as f64 + 1.0) * (s.n_b as f64)).sqrt();
            (FockState::new(s.n_a + 1, s.n_b - 1), amp)
        })
    })
}

/// Interaction Hamiltonian H_I = -(omega_ab a b^dag + omega_ba a^dag b),
/// built from the within-sector exchange operators so every sector block is
/// exact at the cutoff.
pub fn interaction_hamiltonian(params: &ModelParams, basis: &FockBasis) -> OperatorMatrix {
    interaction_raw(
        C64::new(params.omega_ab, 0.0),
        C64::new(params.omega_ba, 0.0),
        basis,
    )
}

fn interaction_raw(omega_ab: C64, omega_ba: C64, basis: &FockBasis) -> OperatorMatrix {
    &exchange_ab(basis).scale(-omega_ab) + &exchange_ba(basis).scale(-omega_ba)
}

/// Full Hamiltonian H = H_0 + H_I for the chosen variant.
pub fn hamiltonian(
    params: &ModelParams,
    basis: &FockBasis,
    variant: HamiltonianVariant,
) -> Result<OperatorMatrix> {
    let effective = match variant {
        HamiltonianVariant::Nonreciprocal => *params,
        HamiltonianVariant::Hermitian { g } => ModelParams::new(params.omega0, g, g)?,
    };
    Ok(&free_hamiltonian(&effective, basis) + &interaction_hamiltonian(&effective, basis))
}

/// Diagnostic Hamiltonian builder accepting complex couplings.
///
/// The public parameter type is deliberately real; this raw path exists only
/// to construct counterexamples (a complex coupling breaks the model's PT
/// symmetry, which the classifier must be able to witness). Not used by any
/// production path.
pub fn hamiltonian_raw_complex(
    omega0: f64,
    omega_ab: C64,
    omega_ba: C64,
    basis: &FockBasis,
) -> Result<OperatorMatrix> {
    if !omega0.is_finite()
        || !omega_ab.re.is_finite()
        || !omega_ab.im.is_finite()
        || !omega_ba.re.is_finite()
        || !omega_ba.im.is_finite()
    {
        return Err(Error::NonFinite("raw hamiltonian couplings".into()));
    }
    let free = diagonal(basis, |s| omega0 * (s.total() as f64 + 1.0));
    Ok(&free + &interaction_raw(omega_ab, omega_ba, basis))
}

/// Excitation-imbalance operator
/// Delta = sqrt(omega_ba/omega_ab) a^dag b + sqrt(omega_ab/omega_ba) a b^dag,
/// defined (and hermitian under the similarity map) when
/// omega_ab * omega_ba > 0. Satisfies H = omega0 (N + 1) - g_eff Delta.
pub fn excitation_imbalance(params: &ModelParams, basis: &FockBasis) -> Result<OperatorMatrix> {
    let r = params.coupling_ratio()?;
    let sqrt_r = r.sqrt();
    Ok(&exchange_ab(basis).scale(C64::new(sqrt_r, 0.0))
        + &exchange_ba(basis).scale(C64::new(1.0 / sqrt_r, 0.0)))
}

/// The four intercavity normal-mode ladder operators. In the reciprocal
/// limit they reduce to the familiar symmetric/antisymmetric combinations
/// (a +/- b)/sqrt(2); away from it the raising operators are *not* the
/// adjoints of the lowering ones, yet the canonical pairings still hold:
/// [alpha-, alpha+] = [beta-, beta+] = 1 and the cross pairs vanish.
#[derive(Debug, Clone)]
pub struct IntercavityOps {
    pub alpha_lower: OperatorMatrix,
    pub alpha_raise: OperatorMatrix,
    pub beta_lower: OperatorMatrix,
    pub beta_raise: OperatorMatrix,
}

/// Coefficient convention for the alpha-raising operator; used by the
/// verification suite's fault injection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaRaiseConvention {
    /// The convention whose pairings with the lowering operators are
    /// canonical.
    Canonical,
    /// A deliberately mismatched b^dag coefficient (sqrt(omega_ba/omega_ab)
    /// instead of 1, in the normalized form). Breaks [alpha-, alpha+] = 1 by
    /// a predictable residual; exists so the verification suite can prove
    /// its canonical-commutator check has teeth.
    MismatchedBCoefficient,
}

/// Build the intercavity operators with the canonical raising convention.
pub fn intercavity_ops(params: &ModelParams, basis: &FockBasis) -> Result<IntercavityOps> {
    intercavity_ops_with(params, basis, AlphaRaiseConvention::Canonical)
}

/// Build the intercavity operators, selecting the alpha-raising coefficient
/// convention explicitly.
pub fn intercavity_ops_with(
    params: &ModelParams,
    basis: &FockBasis,
    convention: AlphaRaiseConvention,
) -> Result<IntercavityOps> {
    let r = params.coupling_ratio()?;
    let sqrt_r = C64::new(r.sqrt(), 0.0);
    let inv_sqrt_r = ONE / sqrt_r;
    let norm = C64::new(1.0 / 2.0f64.sqrt(), 0.0);

    let a = lowering_a(basis);
    let b = lowering_b(basis);
    let a_dag = raising_a(basis);
    let b_dag = raising_b(basis);

    let alpha_lower = (&a.scale(sqrt_r) + &b).scale(norm);
    let beta_lower = (&a.scale(sqrt_r) - &b).scale(norm);
    let alpha_raise_b_coeff = match convention {
        AlphaRaiseConvention::Canonical => ONE,
        AlphaRaiseConvention::MismatchedBCoefficient => inv_sqrt_r,
    };
    let alpha_raise = (&a_dag.scale(inv_sqrt_r) + &b_dag.scale(alpha_raise_b_coeff)).scale(norm);
    let beta_raise = (&a_dag.scale(inv_sqrt_r) - &b_dag).scale(norm);

    Ok(IntercavityOps {
        alpha_lower,
        alpha_raise,
        beta_lower,
        beta_raise,
    })
}

/// Parity operator Pi = (-1)^(N_A + N_B) (diagonal, involutive).
pub fn parity(basis: &FockBasis) -> OperatorMatrix {
    diagonal(basis, |s| if s.total() % 2 == 0 { 1.0 } else { -1.0 })
}

/// PT conjugation of an operator: Pi conj(X) Pi, with Pi the parity above
/// and conj the entrywise complex conjugate (time reversal for this model).
/// The model Hamiltonian is PT-symmetric for every real coupling pair; a
/// complex coupling breaks it.
pub fn pt_conjugate(x: &OperatorMatrix, basis: &FockBasis) -> Result<OperatorMatrix> {
    if x.basis_tag != basis.n_total_max() {
        return Err(Error::BasisMismatch(x.basis_tag, basis.n_total_max()));
    }
    let pi = parity(basis);
    let conj = OperatorMatrix {
        basis_tag: x.basis_tag,
        mat: x.mat.map(|z| z.conj()),
    };
    Ok(&(&pi * &conj) * &pi)
}

/// Largest entry magnitude of `op` restricted to rows and columns whose
/// states sit at least `margin` total-photon levels below the cutoff.
/// Operator identities that transiently raise the total number by up to
/// `margin` hold exactly only on these interior states.
pub fn interior_max_abs(op: &OperatorMatrix, basis: &FockBasis, margin: u32) -> f64 {
    let mut max = 0.0f64;
    for (row, &rs) in basis.states().iter().enumerate() {
        if !basis.is_interior(rs, margin) {
            continue;
        }
        for (col, &cs) in basis.states().iter().enumerate() {
            if !basis.is_interior(cs, margin) {
                continue;
            }
            max = max.max(op.entry(row, col).norm());
        }
    }
    max
}
