//! Exponential spike-timing window and the four weight-update laws.
//!
//! Time differences follow the pre-minus-post convention:
//! `delta_t = t_pre - t_post`, so a negative `delta_t` means the
//! presynaptic spike came first.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Parameters of the exponential plasticity window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StdpWindow {
    pub a_plus: f64,
    pub a_minus: f64,
    /// ms
    pub tau_plus: f64,
    /// ms
    pub tau_minus: f64,
}

impl Default for StdpWindow {
    fn default() -> Self {
        Self {
            a_plus: 1.0,
            a_minus: 1.0,
            tau_plus: 10.0,
            tau_minus: 10.0,
        }
    }
}

impl StdpWindow {
    pub fn new(a_plus: f64, a_minus: f64, tau_plus: f64, tau_minus: f64) -> Result<Self> {
        let w = Self {
            a_plus,
            a_minus,
            tau_plus,
            tau_minus,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("stdp.a_plus", self.a_plus),
            ("stdp.a_minus", self.a_minus),
            ("stdp.tau_plus_ms", self.tau_plus),
            ("stdp.tau_minus_ms", self.tau_minus),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `F(delta_t)`; see [`window_value`].
    pub fn value(&self, delta_t: f64) -> Result<f64> {
        window_value(delta_t, self)
    }
}

/// `A+ exp(dt/tau+)` for `dt < 0`, `-A- exp(-dt/tau-)` for `dt > 0`, and 0
/// at `dt == 0`. Both lobes decay away from the origin.
pub fn window_value(delta_t: f64, window: &StdpWindow) -> Result<f64> {
    if !delta_t.is_finite() {
        return Err(Error::NonFinite("spike time difference"));
    }
    Ok(if delta_t < 0.0 {
        window.a_plus * (delta_t / window.tau_plus).exp()
    } else if delta_t > 0.0 {
        -window.a_minus * (-delta_t / window.tau_minus).exp()
    } else {
        0.0
    })
}

/// The two update forms of the multiplicative laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StdpForm {
    /// `w + eta F (target - w)`; the target is 1 for the Panchev law and the
    /// input component for the multiplicative law.
    TowardTarget,
    /// `w + eta F w`
    Proportional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StdpVariant {
    Additive,
    Panchev,
    Soula,
    Multiplicative,
}

impl StdpVariant {
    pub fn name(self) -> &'static str {
        match self {
            StdpVariant::Additive => "additive",
            StdpVariant::Panchev => "panchev",
            StdpVariant::Soula => "soula",
            StdpVariant::Multiplicative => "multiplicative",
        }
    }
}

impl fmt::Display for StdpVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StdpVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "additive" => Ok(StdpVariant::Additive),
            "panchev" => Ok(StdpVariant::Panchev),
            "soula" => Ok(StdpVariant::Soula),
            "multiplicative" => Ok(StdpVariant::Multiplicative),
            other => Err(Error::invalid(
                "stdp.variant",
                format!("unknown variant `{other}` (additive, panchev, soula, multiplicative)"),
            )),
        }
    }
}

/// A complete plasticity law: window, variant and learning rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StdpRule {
    pub variant: StdpVariant,
    pub eta: f64,
    pub w_max: f64,
    pub window: StdpWindow,
    /// When false the literal branch conditions are used (`dt > 0` selects
    /// [`StdpForm::TowardTarget`]). When true the forms are swapped so the
    /// toward-target form always receives a non-negative window value.
    pub flip_branches: bool,
}

impl Default for StdpRule {
    fn default() -> Self {
        Self {
            variant: StdpVariant::Multiplicative,
            eta: 0.1,
            w_max: 1.0,
            window: StdpWindow::default(),
            flip_branches: true,
        }
    }
}

impl StdpRule {
    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::invalid(
                "stdp.eta",
                format!("must lie in (0, 1], got {}", self.eta),
            ));
        }
        if !(self.w_max > 0.0 && self.w_max.is_finite()) {
            return Err(Error::invalid(
                "stdp.w_max",
                format!("must be positive, got {}", self.w_max),
            ));
        }
        Ok(())
    }

    /// Which form applies at `delta_t`.
    pub fn form(&self, delta_t: f64) -> StdpForm {
        let positive = delta_t > 0.0;
        if positive != self.flip_branches {
            StdpForm::TowardTarget
        } else {
            StdpForm::Proportional
        }
    }

    /// Applies the configured law to one synapse. `x` is the input component
    /// (only the multiplicative law reads it); `scale` multiplies the learning rate
    /// (for the eta-free additive and Soula laws it multiplies `F`).
    pub fn apply(&self, w: f64, x: f64, delta_t: f64, scale: f64) -> Result<f64> {
        let f = window_value(delta_t, &self.window)?;
        let form = self.form(delta_t);
        match self.variant {
            StdpVariant::Additive => additive_update(w, scale * f, self.w_max),
            StdpVariant::Panchev => panchev_step(w, f, self.eta * scale, form),
            StdpVariant::Soula => soula_step(w, scale * f, self.w_max),
            StdpVariant::Multiplicative => {
                multiplicative_step(w, x, f, self.eta * scale, form, self.w_max)
            }
        }
    }
}

fn finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite("plasticity input"))
    }
}

/// `w + f`, clamped to `[0, w_max]`.
pub fn additive_update(w: f64, f: f64, w_max: f64) -> Result<f64> {
    finite(&[w, f, w_max])?;
    Ok((w + f).clamp(0.0, w_max))
}

/// Panchev's multiplicative law for a given window value and form.
pub fn panchev_step(w: f64, f: f64, eta: f64, form: StdpForm) -> Result<f64> {
    finite(&[w, f, eta])?;
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::invalid(
            "w",
            format!("Panchev rule needs w in [0, 1], got {w}"),
        ));
    }
    Ok(match form {
        StdpForm::TowardTarget => w + eta * f * (1.0 - w),
        StdpForm::Proportional => w + eta * f * w,
    })
}

pub fn panchev_update(w: f64, delta_t: f64, rule: &StdpRule) -> Result<f64> {
    let f = window_value(delta_t, &rule.window)?;
    panchev_step(w, f, rule.eta, rule.form(delta_t))
}

/// Soula's soft-bounded law: `w + f w (1 - w / w_max)`.
pub fn soula_step(w: f64, f: f64, w_max: f64) -> Result<f64> {
    finite(&[w, f, w_max])?;
    if !(0.0..=w_max).contains(&w) {
        return Err(Error::invalid(
            "w",
            format!("Soula rule needs w in [0, {w_max}], got {w}"),
        ));
    }
    Ok(w + f * w * (1.0 - w / w_max))
}

pub fn soula_update(w: f64, delta_t: f64, rule: &StdpRule) -> Result<f64> {
    let f = window_value(delta_t, &rule.window)?;
    soula_step(w, f, rule.w_max)
}

/// The input-tracking multiplicative law; the result is clamped to
/// `[0, w_max]`.
pub fn multiplicative_step(
    w: f64,
    x: f64,
    f: f64,
    eta: f64,
    form: StdpForm,
    w_max: f64,
) -> Result<f64> {
    finite(&[w, x, f, eta])?;
    let next = match form {
        StdpForm::TowardTarget => w + eta * f * (x - w),
        StdpForm::Proportional => w + eta * f * w,
    };
    Ok(next.clamp(0.0, w_max))
}

pub fn multiplicative_update(w: f64, x: f64, delta_t: f64, rule: &StdpRule) -> Result<f64> {
    let f = window_value(delta_t, &rule.window)?;
    multiplicative_step(w, x, f, rule.eta, rule.form(delta_t), rule.w_max)
}

/// A pre/post spike pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikePair {
    t_pre: f64,
    t_post: f64,
}

impl SpikePair {
    pub fn new(t_pre: f64, t_post: f64) -> Self {
        Self { t_pre, t_post }
    }

    pub fn t_pre(&self) -> f64 {
        self.t_pre
    }

    pub fn t_post(&self) -> f64 {
        self.t_post
    }

    pub fn delta_t(&self) -> f64 {
        self.t_pre - self.t_post
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_window() -> StdpWindow {
        StdpWindow::new(1.0, 1.0, 10.0, 10.0).unwrap()
    }

    #[test]
    fn window_examples() {
        let w = unit_window();
        assert_eq!(window_value(0.0, &w).unwrap(), 0.0);
        assert!((window_value(-10.0, &w).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!((window_value(10.0, &w).unwrap() + (-1.0f64).exp()).abs() < 1e-15);
        assert!((window_value(-10.0, &w).unwrap() - 0.36788).abs() < 1e-5);
        assert!(window_value(f64::NAN, &w).is_err());
        assert!(window_value(f64::INFINITY, &w).is_err());
    }

    #[test]
    fn window_rejects_non_positive_parameters() {
        assert!(StdpWindow::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(StdpWindow::new(1.0, 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn additive_examples() {
        assert!((additive_update(0.5, 0.1, 1.0).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(additive_update(0.3, 0.0, 1.0).unwrap(), 0.3);
        assert_eq!(additive_update(0.95, 0.2, 1.0).unwrap(), 1.0);
        assert_eq!(additive_update(0.05, -0.2, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn panchev_examples() {
        assert_eq!(
            panchev_step(1.0, 0.7, 0.5, StdpForm::TowardTarget).unwrap(),
            1.0
        );
        assert_eq!(
            panchev_step(0.0, 0.7, 0.5, StdpForm::Proportional).unwrap(),
            0.0
        );
        let w = panchev_step(0.5, 1.0, 0.1, StdpForm::TowardTarget).unwrap();
        assert!((w - 0.55).abs() < 1e-15);
        assert!(panchev_step(1.2, 0.1, 0.1, StdpForm::TowardTarget).is_err());
    }

    #[test]
    fn literal_branches_leave_unit_interval() {
        // With the literal branch assignment the toward-target form meets a
        // negative window value, so w=0 is pushed below zero.
        let rule = StdpRule {
            variant: StdpVariant::Panchev,
            eta: 1.0,
            flip_branches: false,
            ..StdpRule::default()
        };
        assert_eq!(rule.form(1.0), StdpForm::TowardTarget);
        assert!(panchev_update(0.0, 1.0, &rule).unwrap() < 0.0);
        let flipped = StdpRule {
            flip_branches: true,
            ..rule
        };
        assert_eq!(flipped.form(1.0), StdpForm::Proportional);
        assert!(panchev_update(0.0, 1.0, &flipped).unwrap() >= 0.0);
    }

    #[test]
    fn soula_examples() {
        assert_eq!(soula_step(0.0, 0.9, 1.0).unwrap(), 0.0);
        assert_eq!(soula_step(1.0, 0.9, 1.0).unwrap(), 1.0);
        assert!((soula_step(0.5, 0.2, 1.0).unwrap() - 0.55).abs() < 1e-15);
        assert!(soula_step(1.5, 0.2, 1.0).is_err());
    }

    #[test]
    fn multiplicative_examples() {
        assert_eq!(
            multiplicative_step(0.4, 0.4, 0.8, 0.3, StdpForm::TowardTarget, 1.0).unwrap(),
            0.4
        );
        let w = multiplicative_step(0.2, 1.0, 0.4, 0.5, StdpForm::TowardTarget, 1.0).unwrap();
        assert!((w - 0.36).abs() < 1e-15);
        let w = multiplicative_step(0.5, 0.9, -0.5, 0.1, StdpForm::Proportional, 1.0).unwrap();
        assert!((w - 0.475).abs() < 1e-15);
        assert!(
            multiplicative_step(f64::NAN, 0.9, -0.5, 0.1, StdpForm::Proportional, 1.0).is_err()
        );
    }

    #[test]
    fn rule_dispatch_matches_direct_calls() {
        let rule = StdpRule::default();
        for &dt in &[-12.0, -0.5, 0.0, 3.0, 40.0] {
            assert_eq!(
                rule.apply(0.3, 0.8, dt, 1.0).unwrap(),
                multiplicative_update(0.3, 0.8, dt, &rule).unwrap()
            );
            let p = StdpRule {
                variant: StdpVariant::Panchev,
                ..rule
            };
            assert_eq!(
                p.apply(0.3, 0.8, dt, 1.0).unwrap(),
                panchev_update(0.3, dt, &p).unwrap()
            );
            let s = StdpRule {
                variant: StdpVariant::Soula,
                ..rule
            };
            assert_eq!(
                s.apply(0.3, 0.8, dt, 1.0).unwrap(),
                soula_update(0.3, dt, &s).unwrap()
            );
        }
    }

    #[test]
    fn zero_scale_freezes_every_law() {
        for variant in [
            StdpVariant::Additive,
            StdpVariant::Panchev,
            StdpVariant::Soula,
            StdpVariant::Multiplicative,
        ] {
            let rule = StdpRule {
                variant,
                ..StdpRule::default()
            };
            assert_eq!(rule.apply(0.42, 0.9, -3.0, 0.0).unwrap(), 0.42);
        }
    }

    #[test]
    fn rule_validation() {
        let bad = StdpRule {
            eta: 0.0,
            ..StdpRule::default()
        };
        assert!(bad.validate().is_err());
        let bad = StdpRule {
            w_max: -1.0,
            ..StdpRule::default()
        };
        assert!(bad.validate().is_err());
        assert!(StdpRule::default().validate().is_ok());
        assert_eq!(
            "multiplicative".parse::<StdpVariant>().unwrap(),
            StdpVariant::Multiplicative
        );
        assert!("triplet".parse::<StdpVariant>().is_err());
    }

    #[test]
    fn spike_pair_difference() {
        let p = SpikePair::new(3.0, 7.5);
        assert_eq!(p.delta_t(), p.t_pre() - p.t_post());
        assert_eq!(p.delta_t(), -4.5);
    }
}
