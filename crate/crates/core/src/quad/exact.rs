use num::{BigInt, BigRational, One, Zero};

use crate::poly::MultiIndex;

fn factorial(k: u64) -> BigInt {
    (1..=k).map(BigInt::from).product::<BigInt>()
}

/// `∫_{S^{2n-1}} ω^α ω̄^β dμ₁(ω)` for the normalized surface measure:
/// zero unless `α = β`, otherwise `(n-1)! α! / (n-1+|α|)!`.
pub fn monomial_sphere_integral(n: usize, alpha: &MultiIndex, beta: &MultiIndex) -> BigRational {
    if alpha != beta {
        return BigRational::zero();
    }
    if n == 0 {
        return BigRational::one();
    }
    let n1 = n as u64 - 1;
    BigRational::new(factorial(n1) * alpha.factorial(), factorial(n1 + alpha.degree() as u64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cq::rat;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn examples() {
        assert!(monomial_sphere_integral(2, &mi(&[1, 0]), &mi(&[0, 1])).is_zero());
        assert_eq!(monomial_sphere_integral(2, &mi(&[1, 0]), &mi(&[1, 0])), rat(1, 2));
        assert_eq!(monomial_sphere_integral(2, &mi(&[2, 0]), &mi(&[2, 0])), rat(1, 3));
        assert_eq!(monomial_sphere_integral(3, &mi(&[0, 0, 0]), &mi(&[0, 0, 0])), rat(1, 1));
        // circle: |ω|^{2k} = 1
        assert_eq!(monomial_sphere_integral(1, &mi(&[4]), &mi(&[4])), rat(1, 1));
    }
}
