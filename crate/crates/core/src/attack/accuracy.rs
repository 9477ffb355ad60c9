//! Guess accuracy scoring.

use crate::error::{Error, Result};

/// For each tolerance, the fraction of guesses within that absolute band of
/// the truth. Non-decreasing in the tolerance.
pub fn guess_accuracy(guesses: &[f64], truth: &[f64], tolerances: &[f64]) -> Result<Vec<f64>> {
    if guesses.len() != truth.len() {
        return Err(Error::LengthMismatch { left: guesses.len(), right: truth.len() });
    }
    if guesses.is_empty() {
        return Ok(vec![0.0; tolerances.len()]);
    }
    let n = guesses.len() as f64;
    Ok(tolerances
        .iter()
        .map(|&tol| {
            let hits = guesses
                .iter()
                .zip(truth)
                .filter(|(g, t)| (*g - *t).abs() <= tol)
                .count();
            hits as f64 / n
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_guesses_hit_every_tolerance() {
        let v = [1.0, 2.0, 3.0];
        assert_eq!(guess_accuracy(&v, &v, &[0.0, 1.0, 5.0]).unwrap(), vec![1.0; 3]);
    }

    #[test]
    fn band_edge_is_inclusive_and_strict_beyond() {
        let truth = [0.0];
        assert_eq!(guess_accuracy(&[2.0], &truth, &[2.0]).unwrap(), vec![1.0]);
        assert_eq!(guess_accuracy(&[2.0002], &truth, &[2.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn worked_example_accuracies() {
        // Guesses {15, 22.5, 30} against truth {15, 20, 30}: full marks at
        // tolerance 3, two thirds at tolerance 2.
        let guesses = [15.0, 22.5, 30.0];
        let truth = [15.0, 20.0, 30.0];
        let acc = guess_accuracy(&guesses, &truth, &[2.0, 3.0]).unwrap();
        assert!((acc[0] - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(acc[1], 1.0);
    }

    #[test]
    fn monotone_in_tolerance() {
        let guesses = [0.0, 1.0, 5.0, 9.0];
        let truth = [1.0, 1.0, 1.0, 1.0];
        let acc = guess_accuracy(&guesses, &truth, &[0.5, 1.0, 4.0, 10.0]).unwrap();
        assert!(acc.windows(2).all(|w| w[0] <= w[1]));
    }
}
