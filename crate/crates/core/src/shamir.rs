//! Polynomials over Z_q and Lagrange interpolation at zero.

use num_traits::Zero;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_math::{GroupParams, Scalar};

/// Coefficients in ascending order; index `k` multiplies `x^k`. High
/// coefficients may be zero, so the length (not the degree) carries the threshold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    coefficients: Vec<Scalar>,
}

impl Polynomial {
    pub fn new(coefficients: Vec<Scalar>) -> Self {
        Polynomial { coefficients }
    }

    /// A uniformly random polynomial with `threshold` coefficients.
    pub fn random<R: RngCore + CryptoRng>(
        params: &GroupParams,
        threshold: usize,
        rng: &mut R,
    ) -> Self {
        Polynomial {
            coefficients: (0..threshold).map(|_| params.random_scalar(rng)).collect(),
        }
    }

    pub fn coefficients(&self) -> &[Scalar] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn constant_term(&self, params: &GroupParams) -> Scalar {
        self.coefficients
            .first()
            .cloned()
            .unwrap_or_else(|| params.zero())
    }

    pub fn evaluate(&self, params: &GroupParams, x: &Scalar) -> Scalar {
        eval_poly(params, self, x)
    }
}

/// A member's public point and the value of some polynomial there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluationPoint {
    pub x: Scalar,
    pub y: Scalar,
}

/// Horner evaluation mod q.
pub fn eval_poly(params: &GroupParams, f: &Polynomial, x: &Scalar) -> Scalar {
    f.coefficients
        .iter()
        .rev()
        .fold(params.zero(), |acc, c| params.add(&params.mul(&acc, x), c))
}

/// The Lagrange coefficient of `target` for evaluating at zero:
/// `prod_{k != target} (0 - x_k) / (x_target - x_k) mod q`.
pub fn lagrange_at_zero(
    params: &GroupParams,
    points: &[Scalar],
    target: &Scalar,
) -> Result<Scalar> {
    check_points(points)?;
    if !points.contains(target) {
        return Err(Error::UnknownPoint);
    }
    let mut numerator = params.one();
    let mut denominator = params.one();
    for x in points.iter().filter(|x| *x != target) {
        numerator = params.mul(&numerator, &params.neg(x));
        denominator = params.mul(&denominator, &params.sub(target, x));
    }
    Ok(params.mul(&numerator, &params.invert(&denominator)?))
}

/// Coefficients for every point at once, in input order.
pub fn lagrange_coefficients(params: &GroupParams, points: &[Scalar]) -> Result<Vec<Scalar>> {
    points
        .iter()
        .map(|x| lagrange_at_zero(params, points, x))
        .collect()
}

/// Value at zero of the unique interpolating polynomial, via Newton divided
/// differences. Shares no code with [`lagrange_at_zero`] so each can check the other.
pub fn interpolate_constant(params: &GroupParams, points: &[EvaluationPoint]) -> Result<Scalar> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    for (i, a) in points.iter().enumerate() {
        if points[i + 1..].iter().any(|b| b.x == a.x) {
            return Err(Error::DuplicatePoint);
        }
    }
    let n = points.len();
    let mut table: Vec<Scalar> = points.iter().map(|pt| pt.y.clone()).collect();
    for level in 1..n {
        for i in (level..n).rev() {
            let rise = params.sub(&table[i], &table[i - 1]);
            let run = params.sub(&points[i].x, &points[i - level].x);
            table[i] = params.mul(&rise, &params.invert(&run)?);
        }
    }
    // Newton form evaluated at x = 0, nested from the highest-order term.
    let mut acc = table[n - 1].clone();
    for i in (0..n - 1).rev() {
        acc = params.add(&params.mul(&acc, &params.neg(&points[i].x)), &table[i]);
    }
    Ok(acc)
}

fn check_points(points: &[Scalar]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if points.iter().any(|x| x.value().is_zero()) {
        return Err(Error::ZeroPoint);
    }
    for (i, a) in points.iter().enumerate() {
        if points[i + 1..].contains(a) {
            return Err(Error::DuplicatePoint);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::paper_group;
    use num_bigint::BigUint;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn poly(params: &GroupParams, coeffs: &[u64]) -> Polynomial {
        Polynomial::new(coeffs.iter().map(|&c| params.scalar_u64(c)).collect())
    }

    /// Term-by-term power sum over unbounded integers, reduced once at the end.
    fn naive_eval(params: &GroupParams, f: &Polynomial, x: &Scalar) -> Scalar {
        let total: BigUint = f
            .coefficients()
            .iter()
            .enumerate()
            .map(|(k, c)| c.value() * x.value().pow(k as u32))
            .sum();
        params.scalar_reduced(&total)
    }

    #[test]
    fn eval_examples() {
        let params = paper_group();
        let s = |v| params.scalar_u64(v);
        let f1 = poly(params, &[7, 0, 0, 12]);
        assert_eq!(eval_poly(params, &f1, &s(13)), s(13));
        // consistent with the dealer table: l_12 - h_12 = 4 - 14 = 13 mod 23
        assert_eq!(params.sub(&s(4), &s(14)), s(13));
        assert_eq!(eval_poly(params, &f1, &s(0)), s(7));
        let f2 = poly(params, &[9, 0, 0, 11]);
        assert_eq!(
            eval_poly(params, &f2, &s(9)),
            params.scalar_u64(9 + 11 * 729)
        );
        assert_eq!(eval_poly(params, &Polynomial::new(vec![]), &s(5)), s(0));
    }

    #[test]
    fn lagrange_examples() {
        let params = paper_group();
        let s = |v| params.scalar_u64(v);
        let points = [s(13), s(11), s(19), s(21)];
        let coeffs: Vec<_> = points
            .iter()
            .map(|x| lagrange_at_zero(params, &points, x).unwrap())
            .collect();
        assert_eq!(coeffs, vec![s(1), s(11), s(9), s(3)]);
        assert_eq!(lagrange_at_zero(params, &[s(5)], &s(5)).unwrap(), s(1));
    }

    #[test]
    fn lagrange_errors() {
        let params = paper_group();
        let s = |v| params.scalar_u64(v);
        assert_eq!(
            lagrange_at_zero(params, &[s(3), s(3)], &s(3)),
            Err(Error::DuplicatePoint)
        );
        assert_eq!(
            lagrange_at_zero(params, &[s(0), s(3)], &s(3)),
            Err(Error::ZeroPoint)
        );
        assert_eq!(
            lagrange_at_zero(params, &[s(1), s(3)], &s(2)),
            Err(Error::UnknownPoint)
        );
        assert_eq!(
            lagrange_at_zero(params, &[], &s(2)),
            Err(Error::EmptyPointSet)
        );
        // 26 = 3 mod 23 collides after reduction
        assert_eq!(
            lagrange_at_zero(params, &[s(26), s(3)], &s(3)),
            Err(Error::DuplicatePoint)
        );
    }

    #[test]
    fn interpolate_examples() {
        let params = paper_group();
        let s = |v| params.scalar_u64(v);
        let at = |f: &Polynomial, xs: &[u64]| -> Vec<EvaluationPoint> {
            xs.iter()
                .map(|&x| EvaluationPoint {
                    x: s(x),
                    y: f.evaluate(params, &s(x)),
                })
                .collect()
        };
        let f1 = poly(params, &[7, 0, 0, 12]);
        assert_eq!(
            interpolate_constant(params, &at(&f1, &[13, 11, 19, 21])).unwrap(),
            s(7)
        );
        let f4 = poly(params, &[17, 0, 0, 3]);
        assert_eq!(
            interpolate_constant(params, &at(&f4, &[1, 2, 3, 4])).unwrap(),
            s(17)
        );
        assert_eq!(
            interpolate_constant(params, &at(&f4, &[22, 5, 9, 14, 6])).unwrap(),
            s(17)
        );
        let single = [EvaluationPoint { x: s(4), y: s(9) }];
        assert_eq!(interpolate_constant(params, &single).unwrap(), s(9));
        let dup = [
            EvaluationPoint { x: s(4), y: s(9) },
            EvaluationPoint { x: s(4), y: s(1) },
        ];
        assert_eq!(
            interpolate_constant(params, &dup),
            Err(Error::DuplicatePoint)
        );
    }

    #[test]
    fn interpolation_identity_over_random_subsets() {
        for (name, ..) in crate::presets::TOY_GROUPS {
            let params = crate::presets::by_name(name).unwrap();
            let mut rng = ChaCha20Rng::seed_from_u64(11);
            let q = params.q().clone();
            let max_n: usize = if q < BigUint::from(12u8) { 5 } else { 10 };
            for _ in 0..200 {
                let t = 1 + (rand::Rng::gen_range(&mut rng, 0..max_n));
                let f = Polynomial::random(&params, t, &mut rng);
                let size = rand::Rng::gen_range(&mut rng, t..=max_n);
                let mut xs: Vec<Scalar> = Vec::new();
                while xs.len() < size {
                    let x = params.random_nonzero_scalar(&mut rng);
                    if !xs.contains(&x) {
                        xs.push(x);
                    }
                }
                xs.shuffle(&mut rng);
                let coeffs = lagrange_coefficients(&params, &xs).unwrap();
                assert_eq!(params.sum(&coeffs), params.one());
                let combined = xs.iter().zip(&coeffs).fold(params.zero(), |acc, (x, c)| {
                    params.add(&acc, &params.mul(c, &f.evaluate(&params, x)))
                });
                assert_eq!(combined, f.constant_term(&params));
                let pts: Vec<_> = xs
                    .iter()
                    .map(|x| EvaluationPoint {
                        x: x.clone(),
                        y: f.evaluate(&params, x),
                    })
                    .collect();
                assert_eq!(
                    interpolate_constant(&params, &pts).unwrap(),
                    f.constant_term(&params)
                );
            }
        }
    }

    #[test]
    fn horner_matches_power_sum() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        for params in [paper_group().clone(), crate::presets::toy_64bit().clone()] {
            for _ in 0..1000 {
                let len = rand::Rng::gen_range(&mut rng, 0..8);
                let f = Polynomial::random(&params, len, &mut rng);
                let x = params.random_scalar(&mut rng);
                assert_eq!(eval_poly(&params, &f, &x), naive_eval(&params, &f, &x));
            }
        }
    }

    mod props {
        use super::*;
        use crate::presets::by_name;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn lagrange_and_newton_recover_f0(
                coeffs in proptest::collection::vec(0u64..53, 1..6),
                extra in 0usize..3,
                seed in any::<u64>(),
            ) {
                let params = by_name("toy-107").unwrap();
                let f = poly(&params, &coeffs);
                let mut xs: Vec<u64> = (1..53).collect();
                xs.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
                let xs: Vec<Scalar> = xs[..coeffs.len() + extra].iter().map(|&x| params.scalar_u64(x)).collect();
                let c = lagrange_coefficients(&params, &xs).unwrap();
                let terms: Vec<Scalar> = xs.iter().zip(&c).map(|(x, c)| params.mul(c, &eval_poly(&params, &f, x))).collect();
                prop_assert_eq!(&params.sum(&terms), &f.coefficients()[0]);
                let pts: Vec<EvaluationPoint> =
                    xs.iter().map(|x| EvaluationPoint { x: x.clone(), y: eval_poly(&params, &f, x) }).collect();
                prop_assert_eq!(&interpolate_constant(&params, &pts).unwrap(), &f.coefficients()[0]);
            }
        }
    }
}
