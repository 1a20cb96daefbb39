use super::SpectraError;

/// Absolute tolerance under which two atom locations are considered equal.
pub const MERGE_TOL: f64 = 1e-9;

/// A probability measure on `[0, ∞)` with finitely many atoms.
///
/// Atoms are kept sorted by location with locations strictly increasing by more
/// than [`MERGE_TOL`]; weights are positive and sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    locations: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Canonicalizes `(location, weight)` pairs: sorts, merges locations closer than
    /// [`MERGE_TOL`] (the group keeps its smallest location), drops zero-weight atoms
    /// and normalizes weights.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self, SpectraError> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        for &(x, w) in &atoms {
            if !x.is_finite() || x < 0.0 {
                return Err(SpectraError::InvalidLocation(x));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(SpectraError::InvalidWeight(w));
            }
        }
        atoms.retain(|&(_, w)| w > 0.0);
        if atoms.is_empty() {
            return Err(SpectraError::EmptyMeasure);
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut locations: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut weights: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut anchor = f64::NEG_INFINITY;
        for (x, w) in atoms {
            if x - anchor <= MERGE_TOL {
                *weights.last_mut().expect("anchor set") += w;
            } else {
                anchor = x;
                locations.push(x);
                weights.push(w);
            }
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Ok(DiscreteMeasure { locations, weights })
    }

    pub fn dirac(location: f64) -> Result<Self, SpectraError> {
        Self::new([(location, 1.0)])
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.locations.iter().copied().zip(self.weights.iter().copied())
    }

    /// `∫ f dμ`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.atoms().map(|(x, w)| w * f(x)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.integrate(|x| x)
    }

    pub fn max_location(&self) -> f64 {
        *self.locations.last().expect("measures are nonempty")
    }

    /// `μ([0, x])`.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.locations.partition_point(|&l| l <= x);
        self.weights[..k].iter().sum::<f64>().min(1.0)
    }
}

/// `sup_x |F₁(x) − F₂(x)|`, attained at an atom of either measure.
pub fn kolmogorov_distance(a: &DiscreteMeasure, b: &DiscreteMeasure) -> f64 {
    let mut worst = 0.0_f64;
    for &x in a.locations().iter().chain(b.locations()) {
        worst = worst.max((a.cdf(x) - b.cdf(x)).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn merges_and_sorts() {
        let m = DiscreteMeasure::new([(2.0, 1.0), (1.0, 1.0), (1.0 + 1e-12, 2.0)]).unwrap();
        assert_eq!(m.locations(), &[1.0, 2.0]);
        assert!((m.weights()[0] - 0.75).abs() < 1e-15);
        assert!((m.weights()[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn drops_zero_weights() {
        let m = DiscreteMeasure::new([(0.0, 0.0), (3.0, 5.0)]).unwrap();
        assert_eq!(m, DiscreteMeasure::dirac(3.0).unwrap());
    }

    #[test]
    fn rejects_bad_atoms() {
        assert!(matches!(DiscreteMeasure::new([(-1.0, 1.0)]), Err(SpectraError::InvalidLocation(_))));
        assert!(matches!(DiscreteMeasure::new([(1.0, -1.0)]), Err(SpectraError::InvalidWeight(_))));
        assert!(matches!(DiscreteMeasure::new([(1.0, 0.0)]), Err(SpectraError::EmptyMeasure)));
        assert!(matches!(DiscreteMeasure::new([(f64::NAN, 1.0)]), Err(SpectraError::InvalidLocation(_))));
    }

    #[test]
    fn kolmogorov_examples() {
        let a = DiscreteMeasure::new([(1.0, 0.5), (2.0, 0.5)]).unwrap();
        let b = DiscreteMeasure::new([(1.0, 0.25), (2.0, 0.75)]).unwrap();
        assert_eq!(kolmogorov_distance(&a, &a), 0.0);
        assert!((kolmogorov_distance(&a, &b) - 0.25).abs() < 1e-15);
        let d0 = DiscreteMeasure::dirac(0.0).unwrap();
        let d1 = DiscreteMeasure::dirac(1.0).unwrap();
        assert_eq!(kolmogorov_distance(&d0, &d1), 1.0);
    }

    #[test]
    fn cdf_steps() {
        let m = DiscreteMeasure::new([(1.0, 0.25), (2.0, 0.75)]).unwrap();
        assert_eq!(m.cdf(0.5), 0.0);
        assert_eq!(m.cdf(1.0), 0.25);
        assert_eq!(m.cdf(5.0), 1.0);
        assert!((m.mean() - 1.75).abs() < 1e-15);
    }

    fn atoms() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((0.0f64..10.0, 0.01f64..5.0), 1..12)
    }

    proptest! {
        #[test]
        fn canonical_form_is_valid(raw in atoms()) {
            let m = DiscreteMeasure::new(raw).unwrap();
            let total: f64 = m.weights().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(m.weights().iter().all(|&w| w > 0.0));
            prop_assert!(m.locations().windows(2).all(|p| p[1] - p[0] > MERGE_TOL));
            prop_assert!(m.locations().iter().all(|&x| x >= 0.0));
        }

        #[test]
        fn kolmogorov_is_symmetric_and_bounded(a in atoms(), b in atoms()) {
            let a = DiscreteMeasure::new(a).unwrap();
            let b = DiscreteMeasure::new(b).unwrap();
            let d = kolmogorov_distance(&a, &b);
            prop_assert_eq!(d, kolmogorov_distance(&b, &a));
            prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
        }

        #[test]
        fn canonicalization_is_idempotent(raw in atoms()) {
            let m = DiscreteMeasure::new(raw).unwrap();
            let again = DiscreteMeasure::new(m.atoms()).unwrap();
            prop_assert_eq!(again.locations(), m.locations());
            for (x, y) in again.weights().iter().zip(m.weights()) {
                prop_assert!((x - y).abs() < 1e-15);
            }
        }
    }
}
