//! Binary logistic loss gradients.

use crate::crypto::Fx;
use crate::error::{Error, Result};

/// First- and second-order gradient of one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientPair {
    pub g: f64,
    pub h: f64,
}

pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// g_i = sigma(logit_i) - y_i, h_i = sigma(logit_i) * (1 - sigma(logit_i)).
pub fn compute_gradients(logits: &[f64], labels: &[u8]) -> Result<Vec<GradientPair>> {
    if logits.len() != labels.len() {
        return Err(Error::LengthMismatch { left: logits.len(), right: labels.len() });
    }
    Ok(logits
        .iter()
        .zip(labels)
        .map(|(&z, &y)| {
            let p = sigmoid(z);
            GradientPair { g: p - y as f64, h: p * (1.0 - p) }
        })
        .collect())
}

/// Fixed-point image of a full round's gradients, indexed by row.
#[derive(Debug, Clone)]
pub struct FxGradients {
    pub g: Vec<Fx>,
    pub h: Vec<Fx>,
}

impl FxGradients {
    pub fn encode(pairs: &[GradientPair]) -> Result<FxGradients> {
        let mut g = Vec::with_capacity(pairs.len());
        let mut h = Vec::with_capacity(pairs.len());
        for p in pairs {
            g.push(Fx::encode(p.g)?);
            h.push(Fx::encode(p.h)?);
        }
        Ok(FxGradients { g, h })
    }

    /// Exact ring totals over a node's rows, ascending accumulation.
    pub fn node_totals(&self, rows: &[u32]) -> (Fx, Fx) {
        let mut gs = Fx::ZERO;
        let mut hs = Fx::ZERO;
        for &row in rows {
            gs += self.g[row as usize];
            hs += self.h[row as usize];
        }
        (gs, hs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_logit_halves() {
        let grads = compute_gradients(&[0.0, 0.0], &[1, 0]).unwrap();
        assert_eq!(grads[0].g, -0.5);
        assert_eq!(grads[0].h, 0.25);
        assert_eq!(grads[1].g, 0.5);
        assert_eq!(grads[1].h, 0.25);
    }

    #[test]
    fn logit_two_positive_label() {
        let grads = compute_gradients(&[2.0], &[1]).unwrap();
        let p = sigmoid(2.0);
        assert!((grads[0].g - (p - 1.0)).abs() < 1e-12);
        assert!((grads[0].g + 0.1192).abs() < 1e-4);
        assert!((grads[0].h - 0.1050).abs() < 1e-4);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(compute_gradients(&[0.0], &[1, 0]).is_err());
    }

    #[test]
    fn logistic_gradients_stay_in_bounds() {
        for z in [-30.0, -2.0, 0.0, 1.5, 30.0] {
            for y in [0u8, 1] {
                let g = compute_gradients(&[z], &[y]).unwrap()[0];
                assert!(g.g >= -1.0 && g.g <= 1.0);
                assert!(g.h >= 0.0 && g.h <= 0.25);
            }
        }
    }
}
