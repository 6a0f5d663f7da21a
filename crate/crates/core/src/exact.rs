//! Exact rational arithmetic helpers shared by the spectral and curvature code.
//!
//! Everything here works over `Ratio<i128>`. The inputs the crate deals with are
//! small integer matrices (entries in {-1, 0, 1}) of dimension at most a
//! handful, so 128-bit numerators never come close to overflowing.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

pub fn rat(n: i128) -> Rational {
    Rational::from_integer(n)
}

pub fn frac(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| *r.numer() as f64 / *r.denom() as f64)
}

/// Formats a rational as an explicit `num/den` string (`"2/1"`, `"-1/2"`).
pub fn fmt_ratio(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"3"`, `"-7/4"`, `"0.125"` or `"1e-3"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty rational literal".into()));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_decimal(n.trim()).ok_or_else(|| bad_literal(text))?;
        let d = parse_decimal(d.trim()).ok_or_else(|| bad_literal(text))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{text}`")));
        }
        return Ok(n / d);
    }
    parse_decimal(s).ok_or_else(|| bad_literal(text))
}

fn bad_literal(text: &str) -> Error {
    Error::Parse(format!("cannot read `{text}` as an exact rational"))
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    let numer: i128 = if joined.is_empty() { 0 } else { joined.parse().ok()? };
    let scale = exponent - frac_part.len() as i32;
    if scale.abs() > 36 {
        return None;
    }
    let pow = 10i128.checked_pow(scale.unsigned_abs())?;
    let mut value = if scale >= 0 {
        Rational::from_integer(numer.checked_mul(pow)?)
    } else {
        Rational::new(numer, pow)
    };
    if negative {
        value = -value;
    }
    Some(value)
}

/// Best rational with denominator at most `max_den` equal to `x` after
/// conversion back to `f64`; `None` when no such rational exists.
pub fn rational_from_f64(x: f64, max_den: i128) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    // Continued fraction convergents.
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        if a.abs() > 1e18 {
            return None;
        }
        let a = a as i128;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            return None;
        }
        let candidate = Rational::new(h2, k2);
        if to_f64(&candidate) == x {
            return Some(candidate);
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let rem = y - a as f64;
        if rem == 0.0 {
            return None;
        }
        y = 1.0 / rem;
    }
    None
}

/// An exact quantity `constant + slope * t` in one symbolic parameter `t`.
///
/// Eigenvalues of `D` and the exponents of the grouped Ricci expansion are
/// both carried in this form; with `slope == 0` it is just a rational.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Affine {
    pub constant: Rational,
    pub slope: Rational,
}

impl Affine {
    pub const fn new(constant: Rational, slope: Rational) -> Self {
        Affine { constant, slope }
    }

    pub fn constant(c: Rational) -> Self {
        Affine { constant: c, slope: Rational::zero() }
    }

    pub fn int(c: i128) -> Self {
        Self::constant(rat(c))
    }

    /// The bare parameter `t`.
    pub fn param() -> Self {
        Affine { constant: Rational::zero(), slope: Rational::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.slope.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.slope.is_zero()
    }

    pub fn eval(&self, t: f64) -> f64 {
        if self.slope.is_zero() {
            to_f64(&self.constant)
        } else {
            to_f64(&self.constant) + to_f64(&self.slope) * t
        }
    }

    pub fn scale(&self, k: Rational) -> Self {
        Affine { constant: self.constant * k, slope: self.slope * k }
    }
}

impl std::ops::Add for Affine {
    type Output = Affine;
    fn add(self, o: Affine) -> Affine {
        Affine { constant: self.constant + o.constant, slope: self.slope + o.slope }
    }
}

impl std::ops::Sub for Affine {
    type Output = Affine;
    fn sub(self, o: Affine) -> Affine {
        Affine { constant: self.constant - o.constant, slope: self.slope - o.slope }
    }
}

impl std::ops::Neg for Affine {
    type Output = Affine;
    fn neg(self) -> Affine {
        Affine { constant: -self.constant, slope: -self.slope }
    }
}

impl From<Rational> for Affine {
    fn from(r: Rational) -> Self {
        Affine::constant(r)
    }
}

impl Ord for Affine {
    fn cmp(&self, other: &Self) -> Ordering {
        self.constant.cmp(&other.constant).then_with(|| self.slope.cmp(&other.slope))
    }
}

impl PartialOrd for Affine {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Affine {
    /// `num/den`, or `num/den+num/den*t` when the slope is nonzero.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.slope.is_zero() {
            return write!(f, "{}", fmt_ratio(&self.constant));
        }
        let sign = if self.slope.is_negative() { '-' } else { '+' };
        write!(f, "{}{}{}*t", fmt_ratio(&self.constant), sign, fmt_ratio(&self.slope.abs()))
    }
}

impl FromStr for Affine {
    type Err = Error;

    /// Accepts rationals and linear expressions in `t`: `"t"`, `"-t"`,
    /// `"2t+1"`, `"1/2 - 3/2*t"`.
    fn from_str(text: &str) -> Result<Self> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(Error::Parse("empty eigenvalue expression".into()));
        }
        let mut out = Affine::default();
        let mut start = 0;
        let bytes = compact.as_bytes();
        for pos in 1..=bytes.len() {
            let at_split = pos == bytes.len()
                || ((bytes[pos] == b'+' || bytes[pos] == b'-')
                    && !matches!(bytes[pos - 1], b'e' | b'E' | b'/'));
            if at_split {
                out = out + parse_term(&compact[start..pos], text)?;
                start = pos;
            }
        }
        Ok(out)
    }
}

fn parse_term(term: &str, whole: &str) -> Result<Affine> {
    match term.strip_suffix('t') {
        Some(coeff) => {
            let coeff = coeff.strip_suffix('*').unwrap_or(coeff);
            let k = match coeff {
                "" | "+" => Rational::one(),
                "-" => -Rational::one(),
                c => parse_rational(c).map_err(|_| {
                    Error::Parse(format!("cannot read `{whole}` as `a + b*t`"))
                })?,
            };
            Ok(Affine::new(Rational::zero(), k))
        }
        None => Ok(Affine::constant(parse_rational(term)?)),
    }
}

pub fn lcm_denominators(v: &[Rational]) -> i128 {
    v.iter().fold(1i128, |acc, r| acc.lcm(r.denom()))
}

pub fn gcd_all(v: &[i128]) -> i128 {
    v.iter().fold(0i128, |acc, x| acc.gcd(x))
}

/// Scales a rational vector to coprime integers with the same direction.
/// The zero vector maps to zeros.
pub fn primitive_integer(v: &[Rational]) -> Vec<i128> {
    let l = lcm_denominators(v);
    let ints: Vec<i128> = v.iter().map(|r| (r * l).to_integer()).collect();
    let g = gcd_all(&ints);
    if g == 0 {
        return ints;
    }
    ints.into_iter().map(|x| x / g).collect()
}

/// Rank of an integer matrix by fraction-free (Bareiss) elimination.
pub fn rank_fraction_free(rows: &[Vec<i128>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut m: Vec<Vec<i128>> = rows.to_vec();
    let width = m[0].len();
    let mut rank = 0;
    let mut prev = 1i128;
    for col in 0..width {
        let Some(pivot) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, pivot);
        for r in rank + 1..m.len() {
            for c in col + 1..width {
                m[r][c] = (m[rank][col] * m[r][c] - m[r][col] * m[rank][c]) / prev;
            }
            m[r][col] = 0;
        }
        prev = m[rank][col];
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Reduced row echelon form over the rationals; zero rows are dropped.
pub fn rref(rows: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    if m.is_empty() {
        return m;
    }
    let width = m[0].len();
    let mut lead = 0;
    for col in 0..width {
        let Some(pivot) = (lead..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(lead, pivot);
        let inv = m[lead][col].recip();
        for x in m[lead].iter_mut() {
            *x *= inv;
        }
        for r in 0..m.len() {
            if r != lead && !m[r][col].is_zero() {
                let factor = m[r][col];
                for c in col..width {
                    let delta = factor * m[lead][c];
                    m[r][c] -= delta;
                }
            }
        }
        lead += 1;
        if lead == m.len() {
            break;
        }
    }
    m.truncate(lead);
    m
}

/// Solves the square system `a x = b` exactly; `None` if `a` is singular.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(*rhs);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(col, pivot);
        let inv = aug[col][col].recip();
        for x in aug[col].iter_mut() {
            *x *= inv;
        }
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let factor = aug[r][col];
                for c in col..=n {
                    let delta = factor * aug[col][c];
                    aug[r][c] -= delta;
                }
            }
        }
    }
    Some(aug.into_iter().map(|row| row[n]).collect())
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
