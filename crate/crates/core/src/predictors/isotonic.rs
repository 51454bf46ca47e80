use nalgebra::{DMatrix, DVector};

use super::{Fitted, Learner, Predictor};
use crate::error::{invalid, Result};

/// Weighted isotonic least-squares fit on distinct, sorted knots.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotonicFit {
    pub knots: Vec<f64>,
    /// Nondecreasing, one value per knot.
    pub fitted: Vec<f64>,
    /// Total weight at each knot after pooling tied covariates.
    pub weights: Vec<f64>,
    blocks: usize,
}

impl IsotonicFit {
    /// Right-continuous step function through the knots, clamped to the
    /// first/last fitted value outside the training range.
    pub fn predict_at(&self, x: f64) -> f64 {
        let idx = self.knots.partition_point(|&k| k <= x);
        if idx == 0 {
            self.fitted[0]
        } else {
            self.fitted[idx - 1]
        }
    }

    /// Number of constant pieces in the fit.
    pub fn n_blocks(&self) -> usize {
        self.blocks
    }
}

/// Pool-adjacent-violators on covariates sorted ascending.
///
/// Observations sharing a covariate value are pooled to their weighted mean
/// first, so the result is a function of `x`.
pub fn pava(x: &[f64], y: &[f64], w: &[f64]) -> Result<IsotonicFit> {
    if x.len() != y.len() || x.len() != w.len() {
        return Err(invalid(format!(
            "length mismatch: x={}, y={}, w={}",
            x.len(),
            y.len(),
            w.len()
        )));
    }
    if x.is_empty() {
        return Err(invalid("isotonic regression needs at least one observation"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(invalid("non-finite covariate or response"));
    }
    if let Some(i) = w.iter().position(|&wi| !(wi.is_finite() && wi > 0.0)) {
        return Err(invalid(format!("weight {i} is not positive: {}", w[i])));
    }
    if let Some(i) = x.windows(2).position(|p| p[1] < p[0]) {
        return Err(invalid(format!(
            "covariates must be sorted ascending (x[{}]={} > x[{}]={})",
            i,
            x[i],
            i + 1,
            x[i + 1]
        )));
    }

    let mut knots = Vec::with_capacity(x.len());
    let mut knot_wy: Vec<f64> = Vec::with_capacity(x.len());
    let mut knot_w: Vec<f64> = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        if knots.last() == Some(&x[i]) {
            *knot_wy.last_mut().unwrap() += w[i] * y[i];
            *knot_w.last_mut().unwrap() += w[i];
        } else {
            knots.push(x[i]);
            knot_wy.push(w[i] * y[i]);
            knot_w.push(w[i]);
        }
    }

    // (weighted sum, weight, one past the last knot in the block)
    let mut stack: Vec<(f64, f64, usize)> = Vec::with_capacity(knots.len());
    for j in 0..knots.len() {
        stack.push((knot_wy[j], knot_w[j], j + 1));
        while stack.len() >= 2 {
            let (s1, w1, _) = stack[stack.len() - 2];
            let (s2, w2, end) = stack[stack.len() - 1];
            if s1 / w1 > s2 / w2 {
                stack.pop();
                let last = stack.last_mut().unwrap();
                *last = (s1 + s2, w1 + w2, end);
            } else {
                break;
            }
        }
    }

    let mut fitted = Vec::with_capacity(knots.len());
    let mut start = 0;
    for &(s, wt, end) in &stack {
        fitted.extend(std::iter::repeat_n(s / wt, end - start));
        start = end;
    }
    Ok(IsotonicFit {
        knots,
        fitted,
        weights: knot_w,
        blocks: stack.len(),
    })
}

/// Unit-weight isotonic regression on the first design column.
#[derive(Debug, Clone, Copy, Default)]
pub struct IsotonicLearner;

impl IsotonicLearner {
    /// Presorts `x` once so repeated refits at the same covariates skip the
    /// sort.
    pub fn predictor(x: &[f64]) -> Result<IsotonicPredictor> {
        if x.is_empty() {
            return Err(invalid("empty training set"));
        }
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
        let sorted_x = order.iter().map(|&i| x[i]).collect();
        Ok(IsotonicPredictor { order, sorted_x })
    }
}

impl Learner for IsotonicLearner {
    type Fitted = IsotonicFit;

    fn fit(&self, design: &DMatrix<f64>, y: &DVector<f64>) -> Result<IsotonicFit> {
        if design.nrows() == 0 {
            return Err(invalid("empty training set"));
        }
        if design.nrows() != y.len() {
            return Err(invalid(format!(
                "design has {} rows but {} responses",
                design.nrows(),
                y.len()
            )));
        }
        let x = design.column(0);
        let mut order: Vec<usize> = (0..y.len()).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
        let xs: Vec<f64> = order.iter().map(|&i| x[i]).collect();
        let ys: Vec<f64> = order.iter().map(|&i| y[i]).collect();
        pava(&xs, &ys, &vec![1.0; ys.len()])
    }
}

impl Fitted for IsotonicFit {
    fn predict(&self, design: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(design.nrows(), design.column(0).iter().map(|&x| self.predict_at(x)))
    }
}

/// Isotonic regression at fixed covariates as a map `y ↦ ĝ(y)`.
#[derive(Debug, Clone)]
pub struct IsotonicPredictor {
    order: Vec<usize>,
    sorted_x: Vec<f64>,
}

impl IsotonicPredictor {
    fn fit(&self, y: &DVector<f64>) -> Option<IsotonicFit> {
        let ys: Vec<f64> = self.order.iter().map(|&i| y[i]).collect();
        pava(&self.sorted_x, &ys, &vec![1.0; ys.len()]).ok()
    }
}

impl Predictor for IsotonicPredictor {
    fn evaluate(&self, y: &DVector<f64>) -> DVector<f64> {
        if y.len() != self.order.len() {
            return DVector::zeros(0);
        }
        let Some(fit) = self.fit(y) else {
            return DVector::from_element(y.len(), f64::NAN);
        };
        let mut out = DVector::zeros(y.len());
        let mut knot = 0;
        for (pos, &i) in self.order.iter().enumerate() {
            while fit.knots[knot] != self.sorted_x[pos] {
                knot += 1;
            }
            out[i] = fit.fitted[knot];
        }
        out
    }

    /// Number of fitted blocks: the fit is locally a block-averaging
    /// projection, whose trace is the block count.
    fn divergence(&self, y: &DVector<f64>) -> Option<f64> {
        self.fit(y).map(|f| f.n_blocks() as f64)
    }
}
