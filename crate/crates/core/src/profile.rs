//! Real-valued coefficient profiles on the strip, given symbolically or by samples.

use serde::{Deserialize, Serialize};

/// A function of `(s, t)`; every variant except [`Profile::TCos`] is independent of `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant { value: f64 },
    /// `height` on `[start, end]`, with smooth transitions of half-width `smoothing`.
    Box { start: f64, end: f64, height: f64, #[serde(default)] smoothing: f64 },
    /// Smooth compactly supported bump with peak value `height`.
    Bump { center: f64, radius: f64, height: f64 },
    /// Monotone transition from `left` to `right`.
    Tanh { center: f64, width: f64, left: f64, right: f64 },
    Sech { center: f64, width: f64, height: f64 },
    /// `−dist(s, [lo, hi])`.
    Tent { lo: f64, hi: f64 },
    /// `−scale · ln cosh((s − center)/scale)`.
    LogCosh { center: f64, scale: f64 },
    Sum { terms: Vec<Profile> },
    Scale { factor: f64, inner: Box<Profile> },
    /// `inner(s − by)`.
    Shift { by: f64, inner: Box<Profile> },
    /// `inner(s) · cos(kπt)`.
    TCos { k: u32, inner: Box<Profile> },
    /// Piecewise linear through `values` at `start + i·step`, constant beyond the ends.
    Samples { start: f64, step: f64, values: Vec<f64> },
}

fn bump_f(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else {
        (-1.0 / y).exp()
    }
}

fn bump_df(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else {
        (-1.0 / y).exp() / (y * y)
    }
}

/// `C^∞` step from 0 (at `y ≤ 0`) to 1 (at `y ≥ 1`).
pub fn smooth_step(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else if y >= 1.0 {
        1.0
    } else {
        let a = bump_f(y);
        a / (a + bump_f(1.0 - y))
    }
}

fn smooth_step_deriv(y: f64) -> f64 {
    if y <= 0.0 || y >= 1.0 {
        return 0.0;
    }
    let (a, b) = (bump_f(y), bump_f(1.0 - y));
    let (da, db) = (bump_df(y), -bump_df(1.0 - y));
    (da * b - a * db) / ((a + b) * (a + b))
}

/// Indicator of `[0, ∞)` smoothed over `[−ε, ε]`.
fn soft_heaviside(x: f64, eps: f64) -> f64 {
    if eps <= 0.0 {
        if x >= 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        smooth_step((x + eps) / (2.0 * eps))
    }
}

fn soft_heaviside_deriv(x: f64, eps: f64) -> f64 {
    if eps <= 0.0 {
        0.0
    } else {
        smooth_step_deriv((x + eps) / (2.0 * eps)) / (2.0 * eps)
    }
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    pub fn boxed(start: f64, end: f64, height: f64, smoothing: f64) -> Self {
        Profile::Box { start, end, height, smoothing }
    }

    pub fn bump(center: f64, radius: f64, height: f64) -> Self {
        Profile::Bump { center, radius, height }
    }

    pub fn sum(terms: Vec<Profile>) -> Self {
        Profile::Sum { terms }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Profile::Scale { factor, inner: Box::new(self) }
    }

    pub fn shifted(self, by: f64) -> Self {
        if by == 0.0 {
            self
        } else {
            Profile::Shift { by, inner: Box::new(self) }
        }
    }

    /// Value at `(s, t)`.
    pub fn eval(&self, s: f64, t: f64) -> f64 {
        match self {
            Profile::TCos { k, inner } => inner.eval(s, t) * (*k as f64 * std::f64::consts::PI * t).cos(),
            Profile::Sum { terms } => terms.iter().map(|p| p.eval(s, t)).sum(),
            Profile::Scale { factor, inner } => factor * inner.eval(s, t),
            Profile::Shift { by, inner } => inner.eval(s - by, t),
            _ => self.value(s),
        }
    }

    /// Average over `t ∈ [0, 1]`.
    pub fn mean(&self, s: f64) -> f64 {
        match self {
            Profile::TCos { k, inner } => {
                if *k == 0 {
                    inner.mean(s)
                } else {
                    0.0
                }
            }
            Profile::Sum { terms } => terms.iter().map(|p| p.mean(s)).sum(),
            Profile::Scale { factor, inner } => factor * inner.mean(s),
            Profile::Shift { by, inner } => inner.mean(s - by),
            _ => self.value(s),
        }
    }

    fn value(&self, s: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Box { start, end, height, smoothing } => {
                height * (soft_heaviside(s - start, *smoothing) - soft_heaviside(s - end, *smoothing))
            }
            Profile::Bump { center, radius, height } => {
                let x = (s - center) / radius;
                if x.abs() >= 1.0 {
                    0.0
                } else {
                    height * (1.0 - 1.0 / (1.0 - x * x)).exp()
                }
            }
            Profile::Tanh { center, width, left, right } => {
                left + (right - left) * 0.5 * (1.0 + ((s - center) / width).tanh())
            }
            Profile::Sech { center, width, height } => height / ((s - center) / width).cosh(),
            Profile::Tent { lo, hi } => {
                if s < *lo {
                    s - lo
                } else if s > *hi {
                    hi - s
                } else {
                    0.0
                }
            }
            Profile::LogCosh { center, scale } => {
                let x = ((s - center) / scale).abs();
                // ln cosh x = x + ln(1 + e^{-2x}) − ln 2
                -scale * (x + (-2.0 * x).exp().ln_1p() - std::f64::consts::LN_2)
            }
            Profile::Samples { start, step, values } => {
                let x = (s - start) / step;
                if values.is_empty() {
                    return 0.0;
                }
                if x <= 0.0 {
                    return values[0];
                }
                let last = values.len() - 1;
                if x >= last as f64 {
                    return values[last];
                }
                let i = x.floor() as usize;
                let f = x - i as f64;
                values[i] * (1.0 - f) + values[i + 1] * f
            }
            Profile::Sum { .. } | Profile::Scale { .. } | Profile::Shift { .. } | Profile::TCos { .. } => self.mean(s),
        }
    }

    /// `∂_s` of the `t`-average.
    pub fn deriv(&self, s: f64) -> f64 {
        match self {
            Profile::Constant { .. } => 0.0,
            Profile::Box { start, end, height, smoothing } => {
                height * (soft_heaviside_deriv(s - start, *smoothing) - soft_heaviside_deriv(s - end, *smoothing))
            }
            Profile::Bump { center, radius, height } => {
                let x = (s - center) / radius;
                if x.abs() >= 1.0 {
                    0.0
                } else {
                    let q = 1.0 - x * x;
                    height * (1.0 - 1.0 / q).exp() * (-2.0 * x / (q * q)) / radius
                }
            }
            Profile::Tanh { center, width, left, right } => {
                let c = ((s - center) / width).cosh();
                (right - left) * 0.5 / (width * c * c)
            }
            Profile::Sech { center, width, height } => {
                let x = (s - center) / width;
                -height * x.tanh() / (x.cosh() * width)
            }
            Profile::Tent { lo, hi } => {
                if s < *lo {
                    1.0
                } else if s > *hi {
                    -1.0
                } else {
                    0.0
                }
            }
            Profile::LogCosh { center, scale } => -((s - center) / scale).tanh(),
            Profile::Sum { terms } => terms.iter().map(|p| p.deriv(s)).sum(),
            Profile::Scale { factor, inner } => factor * inner.deriv(s),
            Profile::Shift { by, inner } => inner.deriv(s - by),
            Profile::TCos { k, inner } => {
                if *k == 0 {
                    inner.deriv(s)
                } else {
                    0.0
                }
            }
            Profile::Samples { start, step, values } => {
                let x = (s - start) / step;
                if values.len() < 2 || x <= 0.0 || x >= (values.len() - 1) as f64 {
                    return 0.0;
                }
                let i = x.floor() as usize;
                (values[i + 1] - values[i]) / step
            }
        }
    }

    pub fn is_t_independent(&self) -> bool {
        match self {
            Profile::TCos { k, inner } => *k == 0 && inner.is_t_independent(),
            Profile::Sum { terms } => terms.iter().all(|p| p.is_t_independent()),
            Profile::Scale { inner, .. } | Profile::Shift { inner, .. } => inner.is_t_independent(),
            _ => true,
        }
    }

    /// Limits of the `t`-average at `−∞` and `+∞` (`None` when unbounded).
    pub fn limits(&self) -> (Option<f64>, Option<f64>) {
        match self {
            Profile::Constant { value } => (Some(*value), Some(*value)),
            Profile::Box { .. } | Profile::Bump { .. } | Profile::Sech { .. } => (Some(0.0), Some(0.0)),
            Profile::Tanh { left, right, .. } => (Some(*left), Some(*right)),
            Profile::Tent { .. } | Profile::LogCosh { .. } => (None, None),
            Profile::Samples { values, .. } => (values.first().copied(), values.last().copied()),
            Profile::Sum { terms } => terms.iter().fold((Some(0.0), Some(0.0)), |(l, r), p| {
                let (a, b) = p.limits();
                (l.zip(a).map(|(x, y)| x + y), r.zip(b).map(|(x, y)| x + y))
            }),
            Profile::Scale { factor, inner } => {
                let (a, b) = inner.limits();
                (a.map(|x| factor * x), b.map(|x| factor * x))
            }
            Profile::Shift { inner, .. } => inner.limits(),
            Profile::TCos { k, inner } => {
                if *k == 0 {
                    inner.limits()
                } else {
                    (Some(0.0), Some(0.0))
                }
            }
        }
    }

    /// An interval outside of which the profile vanishes identically, if there is one.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            Profile::Constant { value } => (*value == 0.0).then_some((0.0, 0.0)),
            Profile::Box { start, end, height, smoothing } => {
                if *height == 0.0 {
                    Some((0.0, 0.0))
                } else {
                    Some((start - smoothing, end + smoothing))
                }
            }
            Profile::Bump { center, radius, .. } => Some((center - radius, center + radius)),
            Profile::Samples { start, step, values } => {
                let first = values.first().copied().unwrap_or(0.0);
                let last = values.last().copied().unwrap_or(0.0);
                (first == 0.0 && last == 0.0).then(|| (*start, start + step * (values.len().max(1) - 1) as f64))
            }
            Profile::Sum { terms } => {
                let mut acc: Option<(f64, f64)> = None;
                for p in terms {
                    let (a, b) = p.support()?;
                    if a == b {
                        continue;
                    }
                    acc = Some(match acc {
                        None => (a, b),
                        Some((x, y)) => (x.min(a), y.max(b)),
                    });
                }
                Some(acc.unwrap_or((0.0, 0.0)))
            }
            Profile::Scale { factor, inner } => {
                if *factor == 0.0 {
                    Some((0.0, 0.0))
                } else {
                    inner.support()
                }
            }
            Profile::Shift { by, inner } => inner.support().map(|(a, b)| if a == b { (a, b) } else { (a + by, b + by) }),
            Profile::TCos { inner, .. } => inner.support(),
            Profile::Tanh { .. } | Profile::Sech { .. } | Profile::Tent { .. } | Profile::LogCosh { .. } => None,
        }
    }

    /// Whether the profile vanishes identically.
    pub fn is_zero(&self) -> bool {
        matches!(self.support(), Some((a, b)) if a == b)
    }

    /// Points where the profile or its derivative may jump.
    pub fn kinks(&self) -> Vec<f64> {
        let mut v = match self {
            Profile::Box { start, end, smoothing, .. } if *smoothing <= 0.0 => vec![*start, *end],
            Profile::Tent { lo, hi } => vec![*lo, *hi],
            Profile::Samples { start, step, values } => (0..values.len()).map(|i| start + step * i as f64).collect(),
            Profile::Sum { terms } => terms.iter().flat_map(|p| p.kinks()).collect(),
            Profile::Scale { inner, .. } | Profile::TCos { inner, .. } => inner.kinks(),
            Profile::Shift { by, inner } => inner.kinks().into_iter().map(|x| x + by).collect(),
            _ => Vec::new(),
        };
        v.sort_by(|a, b| a.total_cmp(b));
        v.dedup();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_step_is_symmetric() {
        for i in 0..=20 {
            let y = i as f64 / 20.0;
            assert!((smooth_step(y) + smooth_step(1.0 - y) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let ps = [
            Profile::boxed(0.0, 1.0, 2.0, 0.2),
            Profile::bump(0.5, 1.5, -1.0),
            Profile::Tanh { center: 0.3, width: 2.0, left: 0.5, right: 1.5 },
            Profile::Sech { center: -1.0, width: 0.7, height: 0.4 },
            Profile::LogCosh { center: 0.2, scale: 1.3 },
            Profile::sum(vec![Profile::constant(1.0), Profile::bump(0.0, 1.0, 1.0).shifted(0.3).scaled(-2.0)]),
        ];
        let h = 1e-5;
        for p in &ps {
            for i in -30..=30 {
                let s = i as f64 * 0.1 + 0.013;
                let fd = (p.mean(s + h) - p.mean(s - h)) / (2.0 * h);
                assert!((fd - p.deriv(s)).abs() < 1e-6, "{:?} at {}", p, s);
            }
        }
    }

    #[test]
    fn limits_and_support() {
        let b = Profile::sum(vec![
            Profile::Tanh { center: 0.0, width: 1.0, left: 0.5, right: 1.0 },
            Profile::bump(0.0, 1.0, 0.3),
        ]);
        assert_eq!(b.limits(), (Some(0.5), Some(1.0)));
        assert!(b.support().is_none());
        let c = Profile::sum(vec![Profile::bump(0.0, 1.0, 1.0), Profile::boxed(2.0, 3.0, 1.0, 0.1).shifted(1.0)]);
        assert_eq!(c.support(), Some((-1.0, 4.1)));
        assert!(Profile::constant(0.0).is_zero());
        assert!(!Profile::TCos { k: 1, inner: Box::new(Profile::constant(1.0)) }.is_t_independent());
    }

    #[test]
    fn log_cosh_is_stable_far_out() {
        let p = Profile::LogCosh { center: 0.0, scale: 1.0 };
        let v = p.mean(800.0);
        assert!((v - (-(800.0 - std::f64::consts::LN_2))).abs() < 1e-9);
    }

    #[test]
    fn json_round_trip() {
        let p = Profile::sum(vec![Profile::boxed(0.0, 1.0, 1.0, 0.01), Profile::TCos { k: 2, inner: Box::new(Profile::bump(0.0, 1.0, 0.5)) }]);
        let s = serde_json::to_string(&p).unwrap();
        let q: Profile = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }
}
