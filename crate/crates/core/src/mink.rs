//! Expected Minkowski loss for per-class binary targets and its minimizers.
//!
//! For a class posterior `mu = p(t = 1 | x)` and a prediction `y`, the expected
//! loss of order `p` is
//!
//! ```text
//! E[L](y) = (1 - mu) * y^p + mu * (1 - y)^p
//! ```
//!
//! Its derivative in `y`, with the constant factor `p` dropped, is the
//! gradient polynomial
//!
//! ```text
//! g(y) = (1 - mu) * y^n + mu * (y - 1)^n,   n = p - 1
//!      = y^n + sum_{k=1..n} (-1)^k C(n, k) mu y^(n-k)
//! ```
//!
//! For even `p` the polynomial is strictly increasing on the reals and its
//! single real root, the optimal prediction, lies in `[0, 1]`. Order 2 gives
//! back `mu`. Odd orders only produce complex roots for `mu` in `(0, 1)`,
//! see [`analyze_odd_order`].

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Minkowski exponent usable as a posterior transform: even and at least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LossOrder(u32);

impl LossOrder {
    /// Squared error; the identity transform.
    pub const SQUARED: LossOrder = LossOrder(2);
    pub const FOURTH: LossOrder = LossOrder(4);
    pub const SIXTH: LossOrder = LossOrder(6);

    pub fn new(value: u32) -> Result<Self> {
        if value < 2 {
            return Err(Error::InvalidOrder {
                order: value,
                reason: "must be at least 2",
            });
        }
        if value % 2 == 1 {
            return Err(Error::OddOrder(value));
        }
        Ok(LossOrder(value))
    }

    pub fn value(self) -> u32 {
        self.0
    }
}

impl std::fmt::Display for LossOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Odd Minkowski exponent (3, 5, ...). Only accepted by the root analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OddLossOrder(u32);

impl OddLossOrder {
    pub fn new(value: u32) -> Result<Self> {
        if value < 3 {
            return Err(Error::InvalidOrder {
                order: value,
                reason: "odd analysis orders start at 3",
            });
        }
        if value.is_multiple_of(2) {
            return Err(Error::EvenOrderForAnalysis(value));
        }
        Ok(OddLossOrder(value))
    }

    pub fn value(self) -> u32 {
        self.0
    }
}

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Posterior(f64);

impl Posterior {
    pub const ZERO: Posterior = Posterior(0.0);
    pub const HALF: Posterior = Posterior(0.5);
    pub const ONE: Posterior = Posterior(1.0);

    pub fn new(value: f64) -> Result<Self> {
        // NaN fails the range check.
        if (0.0..=1.0).contains(&value) {
            Ok(Posterior(value))
        } else {
            Err(Error::OutOfUnitInterval {
                name: "posterior",
                value,
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn complement(self) -> Posterior {
        Posterior(1.0 - self.0)
    }
}

/// Expected-loss derivative in `y`, highest degree first, leading coefficient 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientPolynomial {
    coefficients: Vec<f64>,
    order: u32,
    mu: Posterior,
}

impl GradientPolynomial {
    /// Expands `(1 - mu) y^n + mu (y - 1)^n` for `n = order - 1`. Valid for
    /// odd and even orders alike.
    fn expand(mu: Posterior, order: u32) -> Self {
        let n = (order - 1) as usize;
        let m = mu.value();
        let mut coefficients = Vec::with_capacity(n + 1);
        coefficients.push(1.0);
        let mut binom = 1.0_f64;
        for k in 1..=n {
            binom = binom * (n + 1 - k) as f64 / k as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            coefficients.push(sign * binom * m);
        }
        GradientPolynomial {
            coefficients,
            order,
            mu,
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn mu(&self) -> Posterior {
        self.mu
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.coefficients.iter().fold(0.0, |acc, &c| acc * y + c)
    }

    /// Value and first derivative by a single Horner pass.
    pub fn eval_with_derivative(&self, y: f64) -> (f64, f64) {
        let mut value = 0.0;
        let mut slope = 0.0;
        for &c in &self.coefficients {
            slope = slope * y + value;
            value = value * y + c;
        }
        (value, slope)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }
}

/// Convergence controls for [`newton_transform`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    tolerance: f64,
    max_iterations: usize,
}

impl SolverConfig {
    pub fn new(tolerance: f64, max_iterations: usize) -> Result<Self> {
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Error::InvalidConfig("tolerance must be positive and finite"));
        }
        if max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1"));
        }
        Ok(SolverConfig {
            tolerance,
            max_iterations,
        })
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn max_iterations(&self) -> usize {
        self.max_iterations
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tolerance: 1e-12,
            max_iterations: 100,
        }
    }
}

/// Every root of an odd-order gradient polynomial, plus whether any of them
/// could serve as a probability.
#[derive(Debug, Clone, PartialEq)]
pub struct RootAnalysis {
    pub roots: Vec<Complex64>,
    pub has_valid_probability_root: bool,
}

/// A root counts as real when its imaginary part is below this bound.
pub const REAL_ROOT_TOLERANCE: f64 = 1e-9;

#[inline]
fn loss_unchecked(y: f64, mu: f64, order: i32) -> f64 {
    (1.0 - mu) * y.powi(order) + mu * (1.0 - y).powi(order)
}

/// `(1 - mu) * y^order + mu * (1 - y)^order`.
pub fn expected_loss(y: f64, mu: Posterior, order: LossOrder) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::OutOfUnitInterval {
            name: "prediction",
            value: y,
        });
    }
    Ok(loss_unchecked(y, mu.value(), order.value() as i32))
}

pub fn gradient_coefficients(mu: Posterior, order: LossOrder) -> GradientPolynomial {
    GradientPolynomial::expand(mu, order.value())
}

/// Optimal prediction under the order-`p` loss, from the factored stationarity
/// condition `(1 - mu) y^n = mu (1 - y)^n`.
///
/// Order 2 returns `mu` bit for bit. The endpoints and `0.5` are fixed points.
pub fn closed_form_transform(mu: Posterior, order: LossOrder) -> Posterior {
    let m = mu.value();
    if order == LossOrder::SQUARED || m == 0.0 || m == 1.0 {
        return mu;
    }
    let n = f64::from(order.value() - 1);
    let r = (m / (1.0 - m)).powf(n.recip());
    Posterior((r / (1.0 + r)).clamp(0.0, 1.0))
}

/// Root of the gradient polynomial by Newton's method, started at `mu` and
/// safeguarded by bisection on the bracket `[0, 1]`.
///
/// A bisection step replaces the Newton step when the latter leaves the
/// current bracket or fails to halve the previous step, so every iterate stays
/// inside `[0, 1]`.
///
/// For `mu > 0.5` the solve runs on `1 - mu` and the root is reflected: in
/// coefficient form the root near 1 is ill-conditioned (the slope there is
/// about `(1 - mu)^(4/5)` at order 6), while the root near 0 is not.
pub fn newton_transform(mu: Posterior, order: LossOrder, config: &SolverConfig) -> Result<Posterior> {
    if mu.value() > 0.5 {
        return newton_lower_half(mu.complement(), order, config).map(Posterior::complement);
    }
    newton_lower_half(mu, order, config)
}

fn newton_lower_half(mu: Posterior, order: LossOrder, config: &SolverConfig) -> Result<Posterior> {
    let m = mu.value();
    if m == 0.0 || m == 1.0 {
        return Ok(mu);
    }
    let poly = gradient_coefficients(mu, order);
    let tol = config.tolerance;

    // g(0) = -mu < 0 and g(1) = 1 - mu > 0; g is increasing on [0, 1].
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut x = m;
    let mut prev_step = hi - lo;
    let mut residual = f64::INFINITY;
    for _ in 0..config.max_iterations {
        let (value, slope) = poly.eval_with_derivative(x);
        residual = value.abs();
        if value == 0.0 {
            return Ok(Posterior(x));
        }
        if value < 0.0 {
            lo = x;
        } else {
            hi = x;
        }

        let newton = x - value / slope;
        let newton_ok = slope > 0.0 && newton > lo && newton < hi && (2.0 * value).abs() <= (prev_step * slope).abs();
        let next = if newton_ok { newton } else { 0.5 * (lo + hi) };

        prev_step = next - x;
        x = next;
        if prev_step.abs() < tol {
            residual = poly.eval(x).abs();
            if residual < tol {
                return Ok(Posterior(x.clamp(0.0, 1.0)));
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: config.max_iterations,
        last: x,
        residual,
    })
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Grid search over `y` in `[0, 1]` followed by golden-section refinement of
/// the winning cell. Uses only [`expected_loss`] evaluations, so it serves as
/// an oracle for the root-based transforms.
pub fn brute_force_transform(mu: Posterior, order: LossOrder, grid_steps: usize) -> Result<Posterior> {
    if grid_steps < 100 {
        return Err(Error::InvalidConfig("grid_steps must be at least 100"));
    }
    let m = mu.value();
    let p = order.value() as i32;
    let steps = grid_steps as f64;

    let mut best_i = 0usize;
    let mut best_loss = f64::INFINITY;
    for i in 0..=grid_steps {
        let loss = loss_unchecked(i as f64 / steps, m, p);
        if loss < best_loss {
            best_loss = loss;
            best_i = i;
        }
    }
    let best_y = best_i as f64 / steps;

    let mut a = (best_i.saturating_sub(1)) as f64 / steps;
    let mut b = ((best_i + 1).min(grid_steps)) as f64 / steps;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = loss_unchecked(c, m, p);
    let mut fd = loss_unchecked(d, m, p);
    for _ in 0..200 {
        if b - a <= 1e-15 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = loss_unchecked(c, m, p);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = loss_unchecked(d, m, p);
        }
    }
    let refined = 0.5 * (a + b);
    let y = if loss_unchecked(refined, m, p) < best_loss {
        refined
    } else {
        best_y
    };
    Ok(Posterior(y.clamp(0.0, 1.0)))
}

/// Roots of the odd-order gradient polynomial
/// `(1 - mu) y^n + mu (y - 1)^n` with `n = order - 1` even.
pub fn analyze_odd_order(mu: Posterior, order: OddLossOrder) -> RootAnalysis {
    let poly = GradientPolynomial::expand(mu, order.value());
    let n = poly.degree();
    let m = mu.value();

    let roots = if m == 0.0 {
        vec![Complex64::new(0.0, 0.0); n]
    } else if m == 1.0 {
        vec![Complex64::new(1.0, 0.0); n]
    } else if n == 2 {
        let c = poly.coefficients();
        quadratic_roots(c[0], c[1], c[2]).to_vec()
    } else {
        polynomial_roots(&poly)
    };

    let has_valid_probability_root = roots.iter().any(|z| is_probability(*z));
    RootAnalysis {
        roots,
        has_valid_probability_root,
    }
}

fn is_probability(z: Complex64) -> bool {
    z.im.abs() <= REAL_ROOT_TOLERANCE && z.re >= -REAL_ROOT_TOLERANCE && z.re <= 1.0 + REAL_ROOT_TOLERANCE
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> [Complex64; 2] {
    let disc = Complex64::new(b * b - 4.0 * a * c, 0.0).sqrt();
    let two_a = 2.0 * a;
    [(-b + disc) / two_a, (-b - disc) / two_a]
}

/// Aberth-Ehrlich simultaneous iteration, then a Newton polish per root.
fn polynomial_roots(poly: &GradientPolynomial) -> Vec<Complex64> {
    let coeffs = poly.coefficients();
    let n = poly.degree();
    let lead = coeffs[0];
    let radius = 1.0 + coeffs[1..].iter().map(|c| (c / lead).abs()).fold(0.0_f64, f64::max);

    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, angle)
        })
        .collect();

    let derivative = |z: Complex64| -> (Complex64, Complex64) {
        let mut value = Complex64::new(0.0, 0.0);
        let mut slope = Complex64::new(0.0, 0.0);
        for &c in coeffs {
            slope = slope * z + value;
            value = value * z + c;
        }
        (value, slope)
    };

    for _ in 0..500 {
        let mut largest = 0.0_f64;
        for k in 0..n {
            let (value, slope) = derivative(z[k]);
            if value == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ratio = value / slope;
            let repulsion: Complex64 = (0..n).filter(|&j| j != k).map(|j| (z[k] - z[j]).inv()).sum();
            let correction = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            z[k] -= correction;
            largest = largest.max(correction.norm());
        }
        if largest < 1e-16 * radius {
            break;
        }
    }

    for root in &mut z {
        for _ in 0..3 {
            let (value, slope) = derivative(*root);
            if slope.norm() == 0.0 {
                break;
            }
            *root -= value / slope;
        }
    }
    z
}
