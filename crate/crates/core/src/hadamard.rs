//! Walsh and Paley Hadamard matrices and their Kronecker products.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{validate_prime, Field, FieldSpec};
use crate::matrix::DenseMatrix;

/// Largest order the generators will build.
pub const HADAMARD_CAP: usize = 4096;

/// Paley constructions accept primes below this bound.
pub const PALEY_PRIME_LIMIT: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Walsh(u32),
    Paley1(u64),
    Paley2(u64),
    Kron(Vec<Provenance>),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Walsh(k) => write!(f, "walsh({k})"),
            Provenance::Paley1(q) => write!(f, "paley1({q})"),
            Provenance::Paley2(q) => write!(f, "paley2({q})"),
            Provenance::Kron(parts) => {
                write!(f, "kron(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A `+-1` matrix with `H H^T = n I`, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HadamardMatrix {
    order: usize,
    entries: Vec<i8>,
    provenance: Provenance,
}

impl HadamardMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.order + j]
    }

    pub fn row(&self, i: usize) -> &[i8] {
        &self.entries[i * self.order..(i + 1) * self.order]
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    /// Exact integer check of `H H^T = n I` and `+-1` entries.
    pub fn is_hadamard(&self) -> bool {
        let n = self.order;
        if self.entries.iter().any(|&e| e != 1 && e != -1) {
            return false;
        }
        (0..n).all(|i| {
            (i..n).all(|j| {
                let dot: i64 = self.row(i).iter().zip(self.row(j)).map(|(&a, &b)| (a as i64) * (b as i64)).sum();
                dot == if i == j { n as i64 } else { 0 }
            })
        })
    }

    /// The matrix over `field`; characteristic 2 is rejected since `+1 = -1`
    /// there.
    pub fn to_dense<F: Field>(&self, field: &F) -> Result<DenseMatrix<F>> {
        if field.spec() == FieldSpec::Prime(2) {
            return Err(Error::InvalidParameter("Hadamard matrices need characteristic other than 2".into()));
        }
        let (one, minus) = (field.one(), field.from_i64(-1));
        let data = self.entries.iter().map(|&e| if e == 1 { one.clone() } else { minus.clone() }).collect();
        DenseMatrix::from_vec(field, self.order, self.order, data)
    }

    /// Negates rows and columns so the first row and column are all `+1`.
    fn normalized(mut self) -> Self {
        let n = self.order;
        for i in 0..n {
            if self.entries[i * n] < 0 {
                for e in &mut self.entries[i * n..(i + 1) * n] {
                    *e = -*e;
                }
            }
        }
        for j in 0..n {
            if self.entries[j] < 0 {
                for i in 0..n {
                    self.entries[i * n + j] = -self.entries[i * n + j];
                }
            }
        }
        self
    }
}

fn kron_entries(a: &[i8], na: usize, b: &[i8], nb: usize) -> Vec<i8> {
    let n = na * nb;
    let mut out = vec![0i8; n * n];
    for i in 0..na {
        for j in 0..na {
            let s = a[i * na + j];
            for k in 0..nb {
                for l in 0..nb {
                    out[(i * nb + k) * n + j * nb + l] = s * b[k * nb + l];
                }
            }
        }
    }
    out
}

/// The `2^k` Walsh-Hadamard matrix, the `k`-th Kronecker power of
/// `[[1, 1], [1, -1]]`.
pub fn walsh(k: u32) -> Result<HadamardMatrix> {
    let n = 1usize.checked_shl(k).filter(|&n| n <= HADAMARD_CAP).ok_or(Error::SizeCap {
        size: 1usize.checked_shl(k).unwrap_or(usize::MAX),
        cap: HADAMARD_CAP,
    })?;
    let mut entries = vec![1i8];
    let mut m = 1;
    for _ in 0..k {
        entries = kron_entries(&entries, m, &[1, 1, 1, -1], 2);
        m *= 2;
    }
    Ok(HadamardMatrix {
        order: n,
        entries,
        provenance: Provenance::Walsh(k),
    })
}

/// Quadratic character modulo the prime `q`.
fn legendre_table(q: u64) -> Vec<i8> {
    let mut chi = vec![-1i8; q as usize];
    chi[0] = 0;
    for x in 1..q {
        chi[((x * x) % q) as usize] = 1;
    }
    chi
}

fn check_paley_prime(q: u64, residue: u64) -> Result<()> {
    if q >= PALEY_PRIME_LIMIT || !validate_prime(q) || q % 4 != residue {
        return Err(Error::InvalidParameter(format!(
            "q = {q} must be a prime below {PALEY_PRIME_LIMIT} with q = {residue} mod 4"
        )));
    }
    Ok(())
}

/// Bordered Jacobsthal matrix `[[0, 1^T], [s 1, Q]]` with
/// `Q[i][j] = chi(j - i)`.
fn bordered_jacobsthal(q: u64, s: i8) -> Vec<i8> {
    let chi = legendre_table(q);
    let m = q as usize + 1;
    let mut c = vec![0i8; m * m];
    for j in 1..m {
        c[j] = 1;
        c[j * m] = s;
    }
    for i in 0..q as usize {
        for j in 0..q as usize {
            c[(i + 1) * m + j + 1] = chi[(j + q as usize - i) % q as usize];
        }
    }
    c
}

/// Paley type I Hadamard matrix of order `q + 1`, for a prime
/// `q = 3 mod 4`.
pub fn paley1(q: u64) -> Result<HadamardMatrix> {
    check_paley_prime(q, 3)?;
    let m = q as usize + 1;
    // H = I + S with S skew-symmetric.
    let mut entries = bordered_jacobsthal(q, -1);
    for i in 0..m {
        entries[i * m + i] = 1;
    }
    Ok(HadamardMatrix {
        order: m,
        entries,
        provenance: Provenance::Paley1(q),
    }
    .normalized())
}

/// Paley type II Hadamard matrix of order `2(q + 1)`, for a prime
/// `q = 1 mod 4`.
pub fn paley2(q: u64) -> Result<HadamardMatrix> {
    check_paley_prime(q, 1)?;
    let m = q as usize + 1;
    let n = 2 * m;
    if n > HADAMARD_CAP {
        return Err(Error::SizeCap { size: n, cap: HADAMARD_CAP });
    }
    let c = bordered_jacobsthal(q, 1);
    let zero_block = [1i8, -1, -1, -1];
    let one_block = [1i8, 1, 1, -1];
    let mut entries = vec![0i8; n * n];
    for i in 0..m {
        for j in 0..m {
            let v = c[i * m + j];
            for a in 0..2 {
                for b in 0..2 {
                    entries[(2 * i + a) * n + 2 * j + b] = if v == 0 {
                        zero_block[2 * a + b]
                    } else {
                        v * one_block[2 * a + b]
                    };
                }
            }
        }
    }
    Ok(HadamardMatrix {
        order: n,
        entries,
        provenance: Provenance::Paley2(q),
    }
    .normalized())
}

pub fn hadamard_kron(hs: &[HadamardMatrix]) -> Result<HadamardMatrix> {
    let first = hs.first().ok_or_else(|| Error::InvalidParameter("empty Hadamard list".into()))?;
    if hs.len() == 1 {
        return Ok(first.clone());
    }
    let order = hs.iter().try_fold(1usize, |a, h| a.checked_mul(h.order)).filter(|&n| n <= HADAMARD_CAP);
    let order = order.ok_or(Error::SizeCap {
        size: hs.iter().fold(1usize, |a, h| a.saturating_mul(h.order)),
        cap: HADAMARD_CAP,
    })?;
    let mut entries = vec![1i8];
    let mut m = 1;
    for h in hs {
        entries = kron_entries(&entries, m, &h.entries, h.order);
        m *= h.order;
    }
    Ok(HadamardMatrix {
        order,
        entries,
        provenance: Provenance::Kron(hs.iter().map(|h| h.provenance.clone()).collect()),
    })
}
