use std::fmt;
use std::sync::Arc;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A bounded test function `h` together with the norms the bounds consume.
///
/// `range` is the closed interval known to contain every value of `h`; with
/// it, `‖h - Eh‖` is bounded by `max(hi - Eh, Eh - lo)`, which is tighter than
/// the generic `2‖h‖`.
#[derive(Clone)]
pub struct TestFunction {
    name: String,
    h: RealFn,
    dh: Option<RealFn>,
    sup_norm: f64,
    deriv_norm: Option<f64>,
    centered_norm: Option<f64>,
    range: Option<(f64, f64)>,
    breaks: Vec<f64>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("sup_norm", &self.sup_norm)
            .field("deriv_norm", &self.deriv_norm)
            .field("centered_norm", &self.centered_norm)
            .field("range", &self.range)
            .field("breaks", &self.breaks)
            .finish()
    }
}

impl TestFunction {
    /// Custom test function with declared sup norm.
    pub fn new<F>(name: impl Into<String>, h: F, sup_norm: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            h: Arc::new(h),
            dh: None,
            sup_norm,
            deriv_norm: None,
            centered_norm: None,
            range: Some((-sup_norm, sup_norm)),
            breaks: Vec::new(),
        }
    }

    /// Attaches an exact derivative and its sup norm.
    pub fn with_derivative<F>(mut self, dh: F, deriv_norm: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.dh = Some(Arc::new(dh));
        self.deriv_norm = Some(deriv_norm);
        self
    }

    /// Declares a sup norm for `h - Eh`, overriding the range-based value.
    pub fn with_centered_norm(mut self, norm: f64) -> Self {
        self.centered_norm = Some(norm);
        self
    }

    pub fn with_range(mut self, lo: f64, hi: f64) -> Self {
        self.range = Some((lo, hi));
        self
    }

    /// Points where `h` or its derivative jumps.
    pub fn with_breaks(mut self, breaks: Vec<f64>) -> Self {
        self.breaks = breaks;
        self
    }

    pub fn zero() -> Self {
        Self::new("zero", |_| 0.0, 0.0).with_derivative(|_| 0.0, 0.0).with_range(0.0, 0.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("const({c})"), move |_| c, c.abs())
            .with_derivative(|_| 0.0, 0.0)
            .with_range(c, c)
    }

    /// `1[x ≤ z]`, the Kolmogorov-class indicator.
    pub fn indicator(z: f64) -> Self {
        Self::new(format!("1[x<={z}]"), move |x| if x <= z { 1.0 } else { 0.0 }, 1.0)
            .with_range(0.0, 1.0)
            .with_breaks(vec![z])
    }

    /// `e^{-x}` on the positive half-line.
    pub fn exp_decay() -> Self {
        Self::new("exp(-x)", |x: f64| (-x.max(0.0)).exp(), 1.0)
            .with_derivative(|x: f64| -(-x.max(0.0)).exp(), 1.0)
            .with_range(0.0, 1.0)
    }

    /// `1/(1+x)`.
    pub fn reciprocal() -> Self {
        Self::new("1/(1+x)", |x: f64| 1.0 / (1.0 + x.max(0.0)), 1.0)
            .with_derivative(|x: f64| -1.0 / (1.0 + x.max(0.0)).powi(2), 1.0)
            .with_range(0.0, 1.0)
    }

    /// `sin(x)` clamped to `[-1, 1]`; its centered norm is declared as 2.
    pub fn sine() -> Self {
        Self::new("sin(x)", |x: f64| x.sin().clamp(-1.0, 1.0), 1.0)
            .with_derivative(|x: f64| x.cos(), 1.0)
            .with_range(-1.0, 1.0)
            .with_centered_norm(2.0)
    }

    /// `min(1, max(0, x - a))`, a 1-Lipschitz ramp bounded by 1.
    pub fn ramp(a: f64) -> Self {
        Self::new(format!("ramp({a})"), move |x: f64| (x - a).clamp(0.0, 1.0), 1.0)
            .with_derivative(move |x: f64| if x > a && x < a + 1.0 { 1.0 } else { 0.0 }, 1.0)
            .with_range(0.0, 1.0)
            .with_breaks(vec![a, a + 1.0])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.h)(x)
    }

    /// Exact derivative if attached, else a central difference that is zero
    /// on flat stretches of step functions.
    pub fn deriv(&self, x: f64) -> f64 {
        match &self.dh {
            Some(d) => d(x),
            None => {
                let e = 1e-6 * x.abs().max(1.0);
                let lo = (x - e).max(0.0);
                ((self.h)(x + e) - (self.h)(lo)) / (x + e - lo)
            }
        }
    }

    pub fn has_derivative(&self) -> bool {
        self.dh.is_some()
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn deriv_norm(&self) -> Option<f64> {
        self.deriv_norm
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn range(&self) -> Option<(f64, f64)> {
        self.range
    }

    /// Bound on `sup |h - Eh|` given the mean `Eh`.
    pub fn centered_norm(&self, eh: f64) -> f64 {
        if let Some(c) = self.centered_norm {
            return c;
        }
        match self.range {
            Some((lo, hi)) => (hi - eh).max(eh - lo).max(0.0),
            None => 2.0 * self.sup_norm,
        }
    }
}
