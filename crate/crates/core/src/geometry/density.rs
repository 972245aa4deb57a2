use serde::{Deserialize, Serialize};

/// A conformal density of weight `w`, trivialized by the metric named in
/// `scale_ref`. Changing scale to `e^{2Υ} g` multiplies the value by `e^{wΥ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedScalar {
    pub value: f64,
    /// Integer or half-integer.
    pub weight: f64,
    pub scale_ref: String,
}

impl WeightedScalar {
    pub fn new(value: f64, weight: f64, scale_ref: impl Into<String>) -> Self {
        debug_assert!((2.0 * weight).fract() == 0.0, "weights are half-integers");
        Self {
            value,
            weight,
            scale_ref: scale_ref.into(),
        }
    }

    /// The same density expressed in the scale `e^{2Υ} g`, where `upsilon`
    /// is `Υ` at the basepoint.
    pub fn rescale(&self, upsilon: f64, new_scale: impl Into<String>) -> Self {
        Self {
            value: self.value * (self.weight * upsilon).exp(),
            weight: self.weight,
            scale_ref: new_scale.into(),
        }
    }

    pub fn factor(weight: f64, upsilon: f64) -> f64 {
        (weight * upsilon).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rescale_round_trip() {
        let s = WeightedScalar::new(2.5, -0.5, "g");
        let back = s.rescale(0.7, "gh").rescale(-0.7, "g");
        assert!((back.value - 2.5).abs() < 1e-15);
        assert_eq!(back.scale_ref, "g");
        assert!((s.rescale(2f64.ln(), "gh").value - 2.5 / 2f64.sqrt()).abs() < 1e-15);
    }
}
