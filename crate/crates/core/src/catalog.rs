//! Named lattices: `Zn`, the mixed-scale lattice `L = 2Z × ½Z × Z⁶`, `E6`,
//! `E8`, `An*`, `D4`, `BCC`, Hadamard rotations of `Zn`, and the Leech
//! lattice. `NAME^k` builds the k-fold orthogonal direct sum.
//!
//! E6, E8 and Leech come from `data/lattices.txt`; the rest are generated.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lattice::Lattice;

const DATA: &str = include_str!("../data/lattices.txt");

/// Certified invariants of a catalog lattice at its construction scale.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub name: String,
    pub dimension: usize,
    pub expected_min_norm: f64,
    pub expected_volume: f64,
    pub expected_kissing: u64,
}

impl CatalogEntry {
    /// The same entry after scaling the lattice to unit volume.
    pub fn unit_volume(&self) -> CatalogEntry {
        let a2 = self.expected_volume.powf(-2.0 / self.dimension as f64);
        CatalogEntry {
            name: self.name.clone(),
            dimension: self.dimension,
            expected_min_norm: self.expected_min_norm * a2,
            expected_volume: 1.0,
            expected_kissing: self.expected_kissing,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Base {
    Integer(usize),
    Mixed,
    E6,
    E8,
    AStar(usize),
    D4,
    Bcc,
    Hadamard(usize),
    Leech,
}

fn parse_base(name: &str) -> Result<Base> {
    let unknown = || Error::UnknownLattice(name.to_string());
    let dim = |s: &str| -> Result<usize> {
        s.parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(unknown)
    };
    let lower = name.to_ascii_lowercase();
    Ok(match lower.as_str() {
        "l" | "mixed" => Base::Mixed,
        "e6" => Base::E6,
        "e8" | "gosset" => Base::E8,
        "d4" => Base::D4,
        "bcc" => Base::Bcc,
        "leech" | "lambda24" => Base::Leech,
        _ => {
            if let Some(rest) = lower.strip_prefix("hadamard") {
                Base::Hadamard(dim(rest)?)
            } else if let Some(rest) = lower.strip_prefix('h') {
                Base::Hadamard(dim(rest)?)
            } else if let Some(rest) = lower.strip_prefix('z') {
                Base::Integer(dim(rest)?)
            } else if let Some(rest) = lower.strip_prefix('a') {
                let digits = rest
                    .strip_suffix("star")
                    .or_else(|| rest.strip_suffix('*'))
                    .ok_or_else(unknown)?;
                Base::AStar(dim(digits)?)
            } else {
                return Err(unknown());
            }
        }
    })
}

/// Splits `NAME^k` into the base name and the power.
fn split_power(name: &str) -> Result<(&str, usize)> {
    match name.split_once('^') {
        None => Ok((name, 1)),
        Some((base, k)) => {
            let k = k
                .parse::<usize>()
                .ok()
                .filter(|&k| k >= 1)
                .ok_or_else(|| Error::UnknownLattice(name.to_string()))?;
            Ok((base, k))
        }
    }
}

fn base_entry(base: Base, name: &str) -> CatalogEntry {
    let (dimension, min, vol, kiss) = match base {
        Base::Integer(n) => (n, 1.0, 1.0, 2 * n as u64),
        Base::Mixed => (8, 0.25, 1.0, 2),
        Base::E6 => (6, 2.0, 3f64.sqrt(), 72),
        Base::E8 => (8, 2.0, 1.0, 240),
        Base::AStar(n) => {
            let nf = n as f64;
            let kiss = if n == 1 { 2 } else { 2 * (n as u64 + 1) };
            (n, nf / (nf + 1.0), 1.0 / (nf + 1.0).sqrt(), kiss)
        }
        Base::D4 => (4, 2.0, 2.0, 24),
        Base::Bcc => (3, 3.0, 4.0, 8),
        Base::Hadamard(n) => (n, 1.0, 1.0, 2 * n as u64),
        Base::Leech => (24, 4.0, 1.0, 196_560),
    };
    CatalogEntry {
        name: name.to_string(),
        dimension,
        expected_min_norm: min,
        expected_volume: vol,
        expected_kissing: kiss,
    }
}

/// Expected invariants for a catalog name (including `NAME^k`).
pub fn entry(name: &str, unit_volume: bool) -> Result<CatalogEntry> {
    let (base_name, k) = split_power(name)?;
    let base = parse_base(base_name)?;
    let b = base_entry(base, name);
    let e = CatalogEntry {
        name: name.to_string(),
        dimension: b.dimension * k,
        expected_min_norm: b.expected_min_norm,
        expected_volume: b.expected_volume.powi(k as i32),
        expected_kissing: b.expected_kissing * k as u64,
    };
    Ok(if unit_volume { e.unit_volume() } else { e })
}

/// Constructs a catalog lattice, optionally normalized to unit volume.
pub fn make(name: &str, unit_volume: bool) -> Result<Lattice> {
    let (base_name, k) = split_power(name)?;
    let base = parse_base(base_name)?;
    let single = build(base)?;
    let mut l = single.clone();
    for _ in 1..k {
        l = product(&l, &single);
    }
    let l = if unit_volume { l.unit_volume() } else { l };
    Ok(l.with_label(name))
}

/// Orthogonal direct sum `L1 ⊕ L2`.
pub fn product(a: &Lattice, b: &Lattice) -> Lattice {
    a.direct_sum(b)
}

/// Names used by the experiment rosters, useful for listing.
pub const NAMES: &[&str] = &[
    "Z<n>", "L", "E6", "E8", "A<n>*", "D4", "BCC", "H<n>", "Leech",
];

fn build(base: Base) -> Result<Lattice> {
    match base {
        Base::Integer(n) => Ok(Lattice::integer(n)),
        Base::Mixed => {
            let mut d = vec![1.0; 8];
            d[0] = 2.0;
            d[1] = 0.5;
            Lattice::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d)))
        }
        Base::E6 => vendored("E6"),
        Base::E8 => vendored("E8"),
        Base::Leech => vendored("Leech"),
        Base::AStar(n) => Lattice::from_gram(&a_n_cartan(n))?.dual(),
        Base::D4 => Lattice::from_columns(&[
            vec![1.0, 1.0, 0.0, 0.0],
            vec![1.0, -1.0, 0.0, 0.0],
            vec![0.0, 1.0, -1.0, 0.0],
            vec![0.0, 0.0, 1.0, -1.0],
        ]),
        Base::Bcc => Lattice::from_columns(&[
            vec![1.0, 1.0, 1.0],
            vec![1.0, -1.0, -1.0],
            vec![-1.0, -1.0, 1.0],
        ]),
        Base::Hadamard(n) => {
            let h = hadamard_matrix(n)?;
            let s = (n as f64).sqrt();
            Lattice::new(h.map(|v| v as f64 / s))
        }
    }
}

fn a_n_cartan(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            2.0
        } else if i.abs_diff(j) == 1 {
            -1.0
        } else {
            0.0
        }
    })
}

fn vendored(name: &str) -> Result<Lattice> {
    let block = parse_data(DATA)?
        .into_iter()
        .find(|b| b.name == name)
        .ok_or_else(|| Error::UnknownLattice(name.to_string()))?;
    let n = block.rows.len();
    let m = DMatrix::from_fn(n, n, |i, j| block.rows[i][j] as f64);
    let l = match block.kind {
        BlockKind::Gram => Lattice::from_gram(&m)?,
        BlockKind::Generator => Lattice::new(m)?,
    };
    match block.sqrt_denominator {
        Some(k) => l.scale(1.0 / (k as f64).sqrt()),
        None => Ok(l),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum BlockKind {
    Gram,
    Generator,
}

#[derive(Debug)]
struct DataBlock {
    name: String,
    kind: BlockKind,
    sqrt_denominator: Option<u64>,
    rows: Vec<Vec<i64>>,
}

fn parse_data(text: &str) -> Result<Vec<DataBlock>> {
    let bad = |msg: &str| Error::Parse(format!("lattice data: {msg}"));
    let mut blocks = Vec::new();
    let mut current: Option<DataBlock> = None;
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut words = line.split_whitespace();
        let head = words.next().unwrap_or_default();
        match (head, current.as_mut()) {
            ("lattice", None) => {
                let name = words.next().ok_or_else(|| bad("missing name"))?;
                current = Some(DataBlock {
                    name: name.to_string(),
                    kind: BlockKind::Generator,
                    sqrt_denominator: None,
                    rows: Vec::new(),
                });
            }
            ("kind", Some(b)) => {
                b.kind = match words.next() {
                    Some("gram") => BlockKind::Gram,
                    Some("generator") => BlockKind::Generator,
                    _ => return Err(bad("unknown kind")),
                };
            }
            ("sqrt_denominator", Some(b)) => {
                let k = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| bad("bad denominator"))?;
                b.sqrt_denominator = Some(k);
            }
            ("end", Some(_)) => {
                let b = current.take().expect("block open");
                let n = b.rows.len();
                if n == 0 || b.rows.iter().any(|r| r.len() != n) {
                    return Err(bad(&format!("block {} is not square", b.name)));
                }
                blocks.push(b);
            }
            (_, Some(b)) => {
                let row: std::result::Result<Vec<i64>, _> =
                    line.split_whitespace().map(str::parse).collect();
                b.rows.push(row.map_err(|_| bad("non-integer entry"))?);
            }
            (_, None) => return Err(bad(&format!("unexpected line `{line}`"))),
        }
    }
    if current.is_some() {
        return Err(bad("unterminated block"));
    }
    Ok(blocks)
}

/// A Hadamard matrix of order `n` from Sylvester doubling and the Paley
/// constructions over prime fields.
pub fn hadamard_matrix(n: usize) -> Result<DMatrix<i64>> {
    if n == 0 || (n > 2 && !n.is_multiple_of(4)) {
        return Err(Error::domain(format!(
            "Hadamard matrices exist only for n = 1, 2 or n divisible by 4 (got {n})"
        )));
    }
    hadamard_inner(n).ok_or_else(|| {
        Error::domain(format!(
            "no Sylvester/Paley construction available for Hadamard order {n}"
        ))
    })
}

fn hadamard_inner(n: usize) -> Option<DMatrix<i64>> {
    match n {
        1 => return Some(DMatrix::from_element(1, 1, 1)),
        2 => return Some(DMatrix::from_row_slice(2, 2, &[1, 1, 1, -1])),
        _ => {}
    }
    if !n.is_multiple_of(4) {
        return None;
    }
    let q = n - 1;
    if is_prime(q) && q % 4 == 3 {
        return Some(paley_one(q));
    }
    if n.is_multiple_of(2) {
        let q = n / 2 - 1;
        if is_prime(q) && q % 4 == 1 {
            return Some(paley_two(q));
        }
        if let Some(h) = hadamard_inner(n / 2) {
            let k = n / 2;
            return Some(DMatrix::from_fn(n, n, |i, j| {
                let v = h[(i % k, j % k)];
                if i >= k && j >= k {
                    -v
                } else {
                    v
                }
            }));
        }
    }
    None
}

fn is_prime(q: usize) -> bool {
    q >= 2 && (2..).take_while(|d| d * d <= q).all(|d| !q.is_multiple_of(d))
}

fn legendre(a: i64, q: usize) -> i64 {
    let q = q as i64;
    let a = a.rem_euclid(q);
    if a == 0 {
        return 0;
    }
    if (1..q).any(|x| (x * x) % q == a) {
        1
    } else {
        -1
    }
}

/// Skew matrix `S = [[0, 1ᵀ], [-1, Q]]` with the Jacobsthal matrix `Q`.
fn paley_core(q: usize, symmetric: bool) -> DMatrix<i64> {
    let n = q + 1;
    DMatrix::from_fn(n, n, |i, j| match (i, j) {
        (0, 0) => 0,
        (0, _) => 1,
        (_, 0) => {
            if symmetric {
                1
            } else {
                -1
            }
        }
        _ => legendre(j as i64 - i as i64, q),
    })
}

fn paley_one(q: usize) -> DMatrix<i64> {
    let s = paley_core(q, false);
    let n = q + 1;
    DMatrix::from_fn(n, n, |i, j| s[(i, j)] + i64::from(i == j))
}

fn paley_two(q: usize) -> DMatrix<i64> {
    let s = paley_core(q, true);
    let k = q + 1;
    let zero_block = [[1, -1], [-1, -1]];
    let unit_block = [[1, 1], [1, -1]];
    DMatrix::from_fn(2 * k, 2 * k, |i, j| {
        let v = s[(i / 2, j / 2)];
        let (a, b) = (i % 2, j % 2);
        if v == 0 {
            zero_block[a][b]
        } else {
            v * unit_block[a][b]
        }
    })
}
