//! Factorization over `F_{2^k}`: squarefree decomposition, distinct-degree
//! factorization, then equal-degree splitting with the absolute trace map
//! (the characteristic-2 replacement for Cantor-Zassenhaus exponentiation).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BinaryField, FieldElem, FieldError, Poly};

/// `unit * prod(factor^multiplicity)`, factors monic irreducible and sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub unit: FieldElem,
    pub factors: Vec<(Poly, u32)>,
}

impl Factorization {
    /// Multiply the factorization back out.
    pub fn expand(&self) -> Poly {
        let mut acc = Poly::from_elems(self.unit.field(), &[self.unit]);
        for (f, m) in &self.factors {
            acc = &acc * &f.pow(*m as u64);
        }
        acc
    }

    /// Degrees of the irreducible factors, with repetition by multiplicity.
    pub fn degrees(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (f, m) in &self.factors {
            for _ in 0..*m {
                out.push(f.degree().unwrap());
            }
        }
        out
    }

    /// Degree over `F_2` of the splitting field: `k * lcm(factor degrees)`.
    pub fn splitting_degree(&self) -> u32 {
        let k = self.unit.field().degree();
        let l = self
            .factors
            .iter()
            .fold(1u32, |acc, (f, _)| super::lcm(acc, f.degree().unwrap() as u32));
        k * l
    }
}

impl Poly {
    /// Factor into monic irreducibles with multiplicities.
    pub fn factor(&self) -> Result<Factorization, FieldError> {
        let unit = self.leading_coeff().ok_or(FieldError::ZeroPolynomial)?;
        let monic = self.make_monic();
        let mut factors = Vec::new();
        for (sqfree, mult) in squarefree_decomposition(&monic) {
            for (block, d) in distinct_degree(&sqfree) {
                for irreducible in equal_degree(&block, d) {
                    factors.push((irreducible, mult));
                }
            }
        }
        factors.sort_by(|a, b| (a.0.degree(), &a.0, a.1).cmp(&(b.0.degree(), &b.0, b.1)));
        // merge repeated factors (possible when a factor shows up in two squarefree parts)
        let mut merged: Vec<(Poly, u32)> = Vec::new();
        for (f, m) in factors {
            match merged.last_mut() {
                Some((g, n)) if *g == f => *n += m,
                _ => merged.push((f, m)),
            }
        }
        Ok(Factorization {
            unit,
            factors: merged,
        })
    }
}

/// Squarefree decomposition of a monic polynomial: pairs `(g, m)` with `g`
/// squarefree and pairwise coprime, and `f = prod g^m`.
pub(crate) fn squarefree_decomposition(f: &Poly) -> Vec<(Poly, u32)> {
    let mut out = Vec::new();
    if f.degree().unwrap_or(0) == 0 {
        return out;
    }
    let deriv = f.derivative();
    let mut c = f.gcd(&deriv);
    let mut w = f.exact_div(&c).expect("gcd divides");
    let mut i = 1;
    while !w.is_one() {
        let y = w.gcd(&c);
        let fac = w.exact_div(&y).expect("gcd divides");
        if !fac.is_one() {
            out.push((fac, i));
        }
        w = y;
        c = c.exact_div(&w).expect("gcd divides");
        i += 1;
    }
    if !c.is_one() {
        for (g, m) in squarefree_decomposition(&c.sqrt()) {
            out.push((g, 2 * m));
        }
    }
    out
}

/// Split a squarefree monic polynomial into products of irreducibles of equal degree.
fn distinct_degree(f: &Poly) -> Vec<(Poly, usize)> {
    let field = f.field();
    let k = field.degree();
    let x = Poly::x(field);
    let mut out = Vec::new();
    let mut rest = f.clone();
    let mut h = x.clone();
    let mut d = 1;
    while rest.degree().unwrap_or(0) >= 2 * d {
        h = h.pow_two_power_mod(k, &rest);
        let g = rest.gcd(&(&h - &x));
        if !g.is_one() {
            rest = rest.exact_div(&g).expect("gcd divides");
            h = h.rem(&rest);
            out.push((g, d));
        }
        d += 1;
    }
    if let Some(n) = rest.degree() {
        if n > 0 {
            out.push((rest, n));
        }
    }
    out
}

/// Split a product of distinct monic irreducibles of degree `d`.
fn equal_degree(f: &Poly, d: usize) -> Vec<Poly> {
    let n = f.degree().unwrap();
    if n == d {
        return vec![f.clone()];
    }
    let field = f.field();
    let k = field.degree() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed_for(f));
    let mut parts = vec![f.clone()];
    while parts.len() < n / d {
        let a = random_poly(field, n, &mut rng);
        // absolute trace of a in each factor F_{2^{kd}}
        let mut t = a.rem(f);
        let mut power = t.clone();
        for _ in 1..(k * d) {
            power = (&power * &power).rem(f);
            t = &t + &power;
        }
        let mut next = Vec::with_capacity(parts.len() + 1);
        for u in parts {
            if u.degree() == Some(d) {
                next.push(u);
                continue;
            }
            let g = u.gcd(&t);
            let gd = g.degree().unwrap_or(0);
            if gd > 0 && gd < u.degree().unwrap() {
                let other = u.exact_div(&g).expect("gcd divides");
                next.push(g);
                next.push(other);
            } else {
                next.push(u);
            }
        }
        parts = next;
    }
    parts
}

fn random_poly(field: BinaryField, below: usize, rng: &mut ChaCha8Rng) -> Poly {
    let coeffs: Vec<u32> = (0..below).map(|_| rng.gen_range(0..field.order())).collect();
    Poly::from_values(field, &coeffs).expect("in range")
}

fn seed_for(f: &Poly) -> u64 {
    f.coeff_values()
        .iter()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, &c| (h ^ c as u64).wrapping_mul(0x100_0000_01b3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(field: BinaryField, coeffs: &[u32]) -> Poly {
        Poly::from_values(field, coeffs).unwrap()
    }

    #[test]
    fn fourth_power_of_linear() {
        let f2 = BinaryField::prime();
        let p = poly(f2, &[1, 0, 0, 0, 1]);
        let fac = p.factor().unwrap();
        assert_eq!(fac.factors, vec![(poly(f2, &[1, 1]), 4)]);
    }

    #[test]
    fn cyclotomic_five_is_irreducible_over_f2() {
        let f2 = BinaryField::prime();
        let p = poly(f2, &[1, 1, 1, 1, 1]);
        let fac = p.factor().unwrap();
        assert_eq!(fac.factors, vec![(p.clone(), 1)]);
        // independent check: no roots in F2, F4, F8; roots exist in F16
        for k in 1..=3 {
            assert!(p.roots_in(BinaryField::new(k).unwrap()).unwrap().is_empty());
        }
        assert_eq!(p.roots_in(BinaryField::new(4).unwrap()).unwrap().len(), 4);
    }

    #[test]
    fn x2_x_1_splits_over_f4() {
        let f4 = BinaryField::new(2).unwrap();
        let w = f4.generator();
        let p = poly(f4, &[1, 1, 1]);
        let fac = p.factor().unwrap();
        let expected = vec![
            (Poly::from_elems(f4, &[w, f4.one()]), 1),
            (Poly::from_elems(f4, &[w + f4.one(), f4.one()]), 1),
        ];
        assert_eq!(fac.factors, expected);
    }

    #[test]
    fn zero_polynomial_is_rejected() {
        assert_eq!(
            Poly::zero(BinaryField::prime()).factor(),
            Err(FieldError::ZeroPolynomial)
        );
    }

    #[test]
    fn non_monic_unit_is_kept() {
        let f4 = BinaryField::new(2).unwrap();
        let p = poly(f4, &[2, 2]);
        let fac = p.factor().unwrap();
        assert_eq!(fac.unit.value(), 2);
        assert_eq!(fac.expand(), p);
    }

    #[test]
    fn splitting_degree_matches_root_search() {
        // every degree-4 polynomial over F2: splitting field degree from the
        // factorization equals the smallest k whose root count reaches 4
        let f2 = BinaryField::prime();
        for bits in 0u32..16 {
            let mut coeffs: Vec<u32> = (0..4).map(|i| (bits >> i) & 1).collect();
            coeffs.push(1);
            let p = poly(f2, &coeffs);
            let fac = p.factor().unwrap();
            let k = fac.splitting_degree();
            assert_eq!(12 % k, 0);
            let smallest = (1..=12)
                .find(|&m| p.roots_in(BinaryField::new(m).unwrap()).unwrap().len() == 4)
                .unwrap();
            assert_eq!(k, smallest, "{p}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn factor_round_trip(k in 1u32..=4, coeffs in proptest::collection::vec(any::<u32>(), 1..13)) {
            let field = BinaryField::new(k).unwrap();
            let coeffs: Vec<u32> = coeffs.iter().map(|c| c % field.order()).collect();
            let p = poly(field, &coeffs);
            prop_assume!(!p.is_zero());
            let fac = p.factor().unwrap();
            prop_assert_eq!(fac.expand(), p);
            for (f, _) in &fac.factors {
                prop_assert!(f.is_irreducible());
                prop_assert!(f.is_monic());
            }
        }
    }
}
