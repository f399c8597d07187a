//! Stratonovich test systems `dy = f(y) dt + g(y) ∘ dW` with a single noise
//! channel.

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A one-channel Stratonovich SDE.
///
/// Jacobians are optional; solvers that need them fall back to
/// [`finite_difference_jacobian`].
pub trait SdeSystem: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn drift(&self, y: &[f64]) -> Vec<f64>;

    fn diffusion(&self, y: &[f64]) -> Vec<f64>;

    fn drift_jacobian(&self, _y: &[f64]) -> Option<Matrix> {
        None
    }

    fn diffusion_jacobian(&self, _y: &[f64]) -> Option<Matrix> {
        None
    }

    /// Symmetric matrices `C` with `yᵀCy` conserved along solutions.
    fn invariants(&self) -> &[Matrix] {
        &[]
    }
}

/// `yᵀCy`.
pub fn invariant_value(c: &Matrix, y: &[f64]) -> Result<f64> {
    if c.size() != y.len() {
        return Err(Error::Dimension(format!(
            "invariant matrix has side {}, state has length {}",
            c.size(),
            y.len()
        )));
    }
    Ok(c.bilinear(y, y))
}

/// Central differences with step `1e-7·max(1, |yⱼ|)` per coordinate.
pub fn finite_difference_jacobian(field: impl Fn(&[f64]) -> Vec<f64>, y: &[f64]) -> Matrix {
    let d = y.len();
    let mut jac = Matrix::zeros(d);
    let mut probe = y.to_vec();
    for j in 0..d {
        let step = 1e-7 * y[j].abs().max(1.0);
        probe[j] = y[j] + step;
        let plus = field(&probe);
        probe[j] = y[j] - step;
        let minus = field(&probe);
        probe[j] = y[j];
        for i in 0..d {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * step);
        }
    }
    jac
}

/// Kubo oscillator on `y = (p, x)`:
///
/// ```text
/// dp = −a x dt − σ x ∘ dW
/// dx =  a p dt + σ p ∘ dW
/// ```
///
/// `p² + x²` is conserved.
#[derive(Clone, Debug)]
pub struct Kubo {
    pub a: f64,
    pub sigma: f64,
    invariants: Vec<Matrix>,
}

impl Kubo {
    pub fn new(a: f64, sigma: f64) -> Self {
        Self {
            a,
            sigma,
            invariants: vec![Matrix::identity(2)],
        }
    }
}

pub fn kubo_system(a: f64, sigma: f64) -> Kubo {
    Kubo::new(a, sigma)
}

impl SdeSystem for Kubo {
    fn name(&self) -> &str {
        "kubo"
    }

    fn dim(&self) -> usize {
        2
    }

    fn drift(&self, y: &[f64]) -> Vec<f64> {
        vec![-self.a * y[1], self.a * y[0]]
    }

    fn diffusion(&self, y: &[f64]) -> Vec<f64> {
        vec![-self.sigma * y[1], self.sigma * y[0]]
    }

    fn drift_jacobian(&self, _y: &[f64]) -> Option<Matrix> {
        Some(rotation_generator(self.a))
    }

    fn diffusion_jacobian(&self, _y: &[f64]) -> Option<Matrix> {
        Some(rotation_generator(self.sigma))
    }

    fn invariants(&self) -> &[Matrix] {
        &self.invariants
    }
}

fn rotation_generator(scale: f64) -> Matrix {
    let mut m = Matrix::zeros(2);
    m[(0, 1)] = -scale;
    m[(1, 0)] = scale;
    m
}

/// Exact Kubo flow: rotation of `y0` by `θ = a·t + σ·W(t)`.
pub fn kubo_exact(y0: [f64; 2], a: f64, sigma: f64, t: f64, w_t: f64) -> [f64; 2] {
    let (sin, cos) = (a * t + sigma * w_t).sin_cos();
    [y0[0] * cos - y0[1] * sin, y0[0] * sin + y0[1] * cos]
}

/// Nonlinear stochastic Hamiltonian system on `(p, q)` with
/// `H₀ = ½pq²` and `H₁ = ½p²q`:
///
/// ```text
/// dp = −pq dt − ½p² ∘ dW
/// dq = ½q² dt + pq ∘ dW
/// ```
///
/// Its flow preserves phase-space area; it has no quadratic invariant.
#[derive(Clone, Copy, Debug, Default)]
pub struct CubicHamiltonian;

pub fn cubic_hamiltonian_system() -> CubicHamiltonian {
    CubicHamiltonian
}

impl CubicHamiltonian {
    pub fn h0(y: &[f64]) -> f64 {
        0.5 * y[0] * y[1] * y[1]
    }

    pub fn h1(y: &[f64]) -> f64 {
        0.5 * y[0] * y[0] * y[1]
    }
}

impl SdeSystem for CubicHamiltonian {
    fn name(&self) -> &str {
        "cubic-hamiltonian"
    }

    fn dim(&self) -> usize {
        2
    }

    fn drift(&self, y: &[f64]) -> Vec<f64> {
        let (p, q) = (y[0], y[1]);
        vec![-p * q, 0.5 * q * q]
    }

    fn diffusion(&self, y: &[f64]) -> Vec<f64> {
        let (p, q) = (y[0], y[1]);
        vec![-0.5 * p * p, p * q]
    }

    fn drift_jacobian(&self, y: &[f64]) -> Option<Matrix> {
        let (p, q) = (y[0], y[1]);
        Some(Matrix::from_rows(&[vec![-q, -p], vec![0.0, q]]).expect("2x2"))
    }

    fn diffusion_jacobian(&self, y: &[f64]) -> Option<Matrix> {
        let (p, q) = (y[0], y[1]);
        Some(Matrix::from_rows(&[vec![-p, 0.0], vec![q, p]]).expect("2x2"))
    }
}

/// Named problems selectable from the command line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Problem {
    Kubo { a: f64, sigma: f64 },
    CubicHamiltonian,
}

impl Problem {
    pub const NAMES: [&'static str; 2] = ["kubo", "cubic-hamiltonian"];

    pub fn from_name(name: &str, a: f64, sigma: f64) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "kubo" => Ok(Problem::Kubo { a, sigma }),
            "cubic-hamiltonian" | "cubic_hamiltonian" | "cubic" => Ok(Problem::CubicHamiltonian),
            _ => Err(Error::Config(format!(
                "unknown problem `{name}`; valid problems: {}",
                Self::NAMES.join(", ")
            ))),
        }
    }

    pub fn system(&self) -> Box<dyn SdeSystem> {
        match *self {
            Problem::Kubo { a, sigma } => Box::new(Kubo::new(a, sigma)),
            Problem::CubicHamiltonian => Box::new(CubicHamiltonian),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Problem::Kubo { .. } => "kubo",
            Problem::CubicHamiltonian => "cubic-hamiltonian",
        }
    }
}
