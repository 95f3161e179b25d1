use std::cmp::Ordering;
use std::fmt;

/// Exponent vector of a monomial `x1^a1 * ... * xn^an`.
///
/// Ordered graded-lexicographically: total degree first, then the exponent
/// of `x1`, then `x2`, and so on.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    exponents: Vec<u32>,
    degree: u32,
}

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        let degree = exponents.iter().sum();
        Self { exponents, degree }
    }

    pub fn zeros(n: usize) -> Self {
        Self { exponents: vec![0; n], degree: 0 }
    }

    /// The index of the single variable `x_{axis+1}`.
    pub fn unit(n: usize, axis: usize) -> Self {
        let mut e = vec![0; n];
        e[axis] = 1;
        Self { exponents: e, degree: 1 }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn get(&self, axis: usize) -> u32 {
        self.exponents[axis]
    }

    /// True when every exponent is even (the monomial survives sphere integration).
    pub fn is_even(&self) -> bool {
        self.exponents.iter().all(|e| e % 2 == 0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        let exponents = self.exponents.iter().zip(&other.exponents).map(|(a, b)| a + b).collect();
        Self { exponents, degree: self.degree + other.degree }
    }

    /// Lower the exponent on `axis` by one; `None` when it is already zero.
    pub fn lowered(&self, axis: usize) -> Option<Self> {
        if self.exponents[axis] == 0 {
            return None;
        }
        let mut e = self.exponents.clone();
        e[axis] -= 1;
        Some(Self { exponents: e, degree: self.degree - 1 })
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree.cmp(&other.degree).then_with(|| self.exponents.cmp(&other.exponents))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.exponents)
    }
}
