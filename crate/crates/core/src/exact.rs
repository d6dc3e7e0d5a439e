//! Exact rational helpers used by the lattice computations.
//!
//! Floating-point geometry drives most of the crate; rationals only ride along
//! when the input was given exactly (integers or `"p/q"` strings), so that
//! lattice questions can be answered without rounding.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {text:?} as a rational number")]
pub struct ParseRationalError {
    pub text: String,
}

/// Parses `"p/q"`, `"p"` or a plain decimal such as `"-1.25"`.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError {
        text: text.to_string(),
    };
    let s = text.trim();
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| err())?;
        let den: BigInt = den.trim().parse().map_err(|_| err())?;
        if den.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let negative = int.trim_start().starts_with('-');
        let int_part: BigInt = match int {
            "" | "-" | "+" => BigInt::zero(),
            _ => int.parse().map_err(|_| err())?,
        };
        let frac_part: BigInt = frac.parse().map_err(|_| err())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let magnitude = Rational::new(int_part.abs() * &scale + frac_part, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    let n: BigInt = s.parse().map_err(|_| err())?;
    Ok(Rational::from_integer(n))
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn from_i64(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Solves the square system `rows · x = rhs` exactly. `None` when singular.
pub fn solve(rows: &[Vec<Rational>], rhs: &[Rational]) -> Option<Vec<Rational>> {
    let n = rows.len();
    let mut m: Vec<Vec<Rational>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut row = r.clone();
            row.push(b.clone());
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let inv = m[col][col].recip();
        for v in m[col].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..=n {
                    let sub = &factor * &m[col][c];
                    m[r][c] = &m[r][c] - sub;
                }
            }
        }
    }
    Some(m.into_iter().map(|mut row| row.pop().unwrap()).collect())
}

pub fn determinant(rows: &[Vec<Rational>]) -> Rational {
    let n = rows.len();
    let mut m = rows.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Rational::zero();
        };
        if pivot != col {
            m.swap(col, pivot);
            det = -det;
        }
        det = &det * &m[col][col];
        for r in col + 1..n {
            if !m[r][col].is_zero() {
                let factor = &m[r][col] / &m[col][col];
                for c in col..n {
                    let sub = &factor * &m[col][c];
                    m[r][c] = &m[r][c] - sub;
                }
            }
        }
    }
    det
}

/// A nonzero vector orthogonal to every row of a rank `len - 1` matrix.
pub fn null_vector(rows: &[Vec<Rational>], len: usize) -> Option<Vec<Rational>> {
    // Reduced row echelon form, then read off the single free column.
    let mut m = rows.to_vec();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..len {
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for v in m[row].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in 0..len {
                    let sub = &factor * &m[row][c];
                    m[r][c] = &m[r][c] - sub;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if pivots.len() + 1 != len {
        return None;
    }
    let free = (0..len).find(|c| !pivots.contains(c))?;
    let mut v = vec![Rational::zero(); len];
    v[free] = Rational::one();
    for (r, &pc) in pivots.iter().enumerate() {
        v[pc] = -m[r][free].clone();
    }
    Some(v)
}

/// Scales a rational vector to the primitive integer vector with the same direction.
pub fn primitive_integer_vector(v: &[Rational]) -> Vec<BigInt> {
    let den = v
        .iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<BigInt> = v.iter().map(|q| (q * &den).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

/// Least positive rational `s` with `s * q` integral for every entry `q`.
///
/// For a nonzero `q = a/b` in lowest terms, `s * q ∈ ℤ` iff `s ∈ (b/a)ℤ`; the
/// intersection of these groups is generated by `lcm(b) / gcd(a)`.
pub fn minimal_integral_scale<'a>(entries: impl IntoIterator<Item = &'a Rational>) -> Option<Rational> {
    let mut num_gcd = BigInt::zero();
    let mut den_lcm = BigInt::one();
    let mut any = false;
    for q in entries {
        if q.is_zero() {
            continue;
        }
        any = true;
        num_gcd = num_gcd.gcd(&q.numer().abs());
        den_lcm = den_lcm.lcm(q.denom());
    }
    any.then(|| Rational::new(den_lcm, num_gcd))
}

pub fn is_integer(q: &Rational) -> bool {
    q.denom().is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(q("7/5"), Rational::new(7.into(), 5.into()));
        assert_eq!(q("-14/10"), Rational::new((-7).into(), 5.into()));
        assert_eq!(q("-1.25"), Rational::new((-5).into(), 4.into()));
        assert_eq!(q("-0.5"), Rational::new((-1).into(), 2.into()));
        assert_eq!(q("3"), from_i64(3));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert_eq!(format_rational(&q("6/3")), "2");
        assert_eq!(format_rational(&q("-7/4")), "-7/4");
    }

    #[test]
    fn minimal_scale_matches_hand_values() {
        let entries = [q("7/5"), q("0"), q("-7/4"), q("1"), q("-1")];
        assert_eq!(minimal_integral_scale(&entries), Some(from_i64(20)));
        let entries = [q("3"), q("-3")];
        assert_eq!(minimal_integral_scale(&entries), Some(q("1/3")));
        assert_eq!(minimal_integral_scale(&[q("0")]), None);
    }

    #[test]
    fn exact_linear_algebra() {
        let rows = vec![vec![q("2"), q("1")], vec![q("1"), q("3")]];
        assert_eq!(determinant(&rows), from_i64(5));
        let x = solve(&rows, &[q("3"), q("4")]).unwrap();
        assert_eq!(x, vec![q("1"), q("1")]);
        let nv = null_vector(&[vec![q("1"), q("1")]], 2).unwrap();
        assert_eq!(primitive_integer_vector(&nv), vec![BigInt::from(-1), BigInt::from(1)]);
    }
}
