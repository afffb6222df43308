use super::ModelError;

const SCALE: i64 = 1_000_000;

/// A non-negative resource quantity stored as fixed-point micro-units.
///
/// Table-style catalog values such as 3.75 or 15.25 are exact, so feasibility
/// comparisons never involve a float tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ResourceAmount(i64);

impl ResourceAmount {
    pub const ZERO: ResourceAmount = ResourceAmount(0);

    pub fn from_units(units: u64) -> Self {
        ResourceAmount(units as i64 * SCALE)
    }

    /// Rounds to the nearest micro-unit. Rejects negative or non-finite input.
    pub fn from_f64(value: f64) -> Result<Self, ModelError> {
        if !value.is_finite() || value < 0.0 {
            return Err(ModelError::InvalidAmount(value));
        }
        Ok(ResourceAmount((value * SCALE as f64).round() as i64))
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE as f64
    }

    pub fn micros(self) -> i64 {
        self.0
    }

    pub(crate) fn from_micros(micros: i64) -> Self {
        debug_assert!(micros >= 0);
        ResourceAmount(micros)
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl std::ops::Add for ResourceAmount {
    type Output = ResourceAmount;
    fn add(self, rhs: ResourceAmount) -> ResourceAmount {
        ResourceAmount(self.0 + rhs.0)
    }
}

impl std::fmt::Display for ResourceAmount {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

/// One value per resource dimension, in the instance's dimension order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ResourceVector(Vec<ResourceAmount>);

impl ResourceVector {
    pub fn new(amounts: Vec<ResourceAmount>) -> Self {
        ResourceVector(amounts)
    }

    pub fn zeros(dims: usize) -> Self {
        ResourceVector(vec![ResourceAmount::ZERO; dims])
    }

    /// Convenience constructor for literal values.
    pub fn from_f64s(values: &[f64]) -> Result<Self, ModelError> {
        values
            .iter()
            .map(|&v| ResourceAmount::from_f64(v))
            .collect::<Result<Vec<_>, _>>()
            .map(ResourceVector)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, dim: usize) -> ResourceAmount {
        self.0[dim]
    }

    pub fn amounts(&self) -> &[ResourceAmount] {
        &self.0
    }

    pub fn to_f64s(&self) -> Vec<f64> {
        self.0.iter().map(|a| a.to_f64()).collect()
    }

    /// Componentwise `self <= other`. Both vectors must share a dimension
    /// count; instance validation guarantees that for solver code.
    pub fn fits_within(&self, other: &ResourceVector) -> bool {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn add_assign(&mut self, other: &ResourceVector) {
        debug_assert_eq!(self.len(), other.len());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a = *a + *b;
        }
    }

    pub fn sub_assign_saturating(&mut self, other: &ResourceVector) {
        debug_assert_eq!(self.len(), other.len());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a = ResourceAmount((a.0 - b.0).max(0));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_fractions_are_exact() {
        let a = ResourceAmount::from_f64(3.75).unwrap();
        let b = ResourceAmount::from_f64(15.25).unwrap();
        assert_eq!(a.micros(), 3_750_000);
        assert_eq!(b.micros(), 15_250_000);
        assert_eq!((a + a).to_f64(), 7.5);
    }

    #[test]
    fn negative_amounts_rejected() {
        assert!(ResourceAmount::from_f64(-0.5).is_err());
        assert!(ResourceAmount::from_f64(f64::NAN).is_err());
    }

    #[test]
    fn componentwise_fit() {
        let cap = ResourceVector::from_f64s(&[16.0, 32.0, 160.0]).unwrap();
        let demand = ResourceVector::from_f64s(&[4.0, 15.0, 80.0]).unwrap();
        let too_big = ResourceVector::from_f64s(&[4.0, 33.0, 80.0]).unwrap();
        assert!(demand.fits_within(&cap));
        assert!(!too_big.fits_within(&cap));
    }
}
