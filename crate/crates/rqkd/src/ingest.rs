//! Molecular integral ingestion.
//!
//! Parses FCIDUMP files (the de-facto interchange format for correlated-method
//! integrals) into an [`IntegralSet`] and assembles the active-space
//! coefficients consumed by the factorizer. The ingested orbitals are treated
//! as the full active space: any frozen-core contributions are assumed to be
//! folded into the file's scalar term upstream.

use ndarray::{Array2, Array4};

use crate::error::Error;
use crate::Result;

/// Tolerance used when validating tensor symmetries.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// One- and two-electron integrals in a chosen orbital basis.
///
/// `g` is stored in chemists' notation `(pq|rs)` with all 8-fold symmetry
/// images populated.
#[derive(Debug, Clone)]
pub struct IntegralSet {
    pub n_orb: usize,
    /// Scalar energy offset (nuclear repulsion plus any upstream core energy).
    pub e_nuc_ext: f64,
    /// Symmetric one-electron matrix, Hartree.
    pub h: Array2<f64>,
    /// Two-electron tensor `(pq|rs)`, Hartree.
    pub g: Array4<f64>,
    pub n_alpha: usize,
    pub n_beta: usize,
}

/// Active-space Hamiltonian coefficients: scalar, effective one-body matrix
/// `kappa`, and the untouched two-electron tensor.
#[derive(Debug, Clone)]
pub struct ActiveHamiltonian {
    pub n_orb: usize,
    pub e_ext: f64,
    pub kappa: Array2<f64>,
    pub g: Array4<f64>,
    pub n_alpha: usize,
    pub n_beta: usize,
}

/// Per-symmetry-class deviation report from [`validate_symmetries`].
#[derive(Debug, Clone)]
pub struct SymmetryReport {
    /// `max |h_pq - h_qp|`.
    pub h_symmetry: f64,
    /// Deviations for the seven nontrivial 8-fold images of `g`, in the order
    /// qprs, pqsr, qpsr, rspq, srpq, rsqp, srqp.
    pub g_images: [f64; 7],
    /// `max |g_(pq)(rs) - g_(rs)(pq)|` for the composite pair matrix.
    pub pair_matrix_symmetry: f64,
    pub passed: bool,
}

impl SymmetryReport {
    pub fn max_deviation(&self) -> f64 {
        let mut m = self.h_symmetry.max(self.pair_matrix_symmetry);
        for d in self.g_images {
            m = m.max(d);
        }
        m
    }
}

impl IntegralSet {
    /// All-zero integrals over `n_orb` orbitals.
    pub fn zeros(n_orb: usize, n_alpha: usize, n_beta: usize) -> Self {
        IntegralSet {
            n_orb,
            e_nuc_ext: 0.0,
            h: Array2::zeros((n_orb, n_orb)),
            g: Array4::zeros((n_orb, n_orb, n_orb, n_orb)),
            n_alpha,
            n_beta,
        }
    }

    /// Serialize to FCIDUMP text (unique entries only, 8-fold order).
    pub fn to_fcidump(&self) -> String {
        let n = self.n_orb;
        let mut out = String::new();
        out.push_str(&format!(
            "&FCI NORB={},NELEC={},MS2={},\n",
            n,
            self.n_alpha + self.n_beta,
            self.n_alpha as i64 - self.n_beta as i64
        ));
        out.push_str(" &END\n");
        let fmt = |v: f64, i: usize, j: usize, k: usize, l: usize| {
            format!("{}  {i}  {j}  {k}  {l}\n", fortran_float(v))
        };
        for p in 0..n {
            for q in 0..=p {
                for r in 0..=p {
                    let s_max = if r == p { q } else { r };
                    for s in 0..=s_max {
                        let v = self.g[[p, q, r, s]];
                        if v != 0.0 {
                            out.push_str(&fmt(v, p + 1, q + 1, r + 1, s + 1));
                        }
                    }
                }
            }
        }
        for p in 0..n {
            for q in 0..=p {
                let v = self.h[[p, q]];
                if v != 0.0 {
                    out.push_str(&fmt(v, p + 1, q + 1, 0, 0));
                }
            }
        }
        out.push_str(&fmt(self.e_nuc_ext, 0, 0, 0, 0));
        out
    }
}

/// Format a float in the Fortran-flavoured layout FCIDUMP consumers expect:
/// sign slot, 17 significant digits, explicit two-digit signed exponent.
fn fortran_float(v: f64) -> String {
    let base = format!("{:.16E}", v.abs());
    // Rust renders the exponent without sign or padding ("E-1", "E5").
    let (mantissa, exp) = base.split_once('E').expect("exponent marker");
    let exp: i32 = exp.parse().expect("exponent digits");
    let sign = if v.is_sign_negative() { '-' } else { ' ' };
    format!("{sign}{mantissa}E{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

/// Parse an FCIDUMP byte stream.
///
/// Accepts Fortran `D` exponent markers and namelist headers spanning several
/// lines. Duplicate entries that disagree beyond 1e-8 are a consistency error.
pub fn parse_fcidump(text: &str) -> Result<IntegralSet> {
    let mut lines = text.lines().enumerate();

    // Collect the namelist header up to &END or a bare "/".
    let mut header = String::new();
    let mut header_end_line = 0;
    let mut saw_start = false;
    for (idx, line) in lines.by_ref() {
        let trimmed = line.trim();
        if !saw_start {
            if trimmed.is_empty() {
                continue;
            }
            if !trimmed.starts_with("&FCI") {
                return Err(Error::parse(idx + 1, "expected &FCI namelist header"));
            }
            saw_start = true;
        }
        header.push_str(trimmed);
        header.push(' ');
        if trimmed.contains("&END") || trimmed.ends_with('/') {
            header_end_line = idx + 1;
            break;
        }
    }
    if !saw_start {
        return Err(Error::parse(1, "empty input: no &FCI header"));
    }
    if header_end_line == 0 {
        return Err(Error::parse(1, "unterminated &FCI header (missing &END)"));
    }

    let n_orb = parse_header_int(&header, "NORB", header_end_line)? as usize;
    let n_elec = parse_header_int(&header, "NELEC", header_end_line)?;
    let ms2 = parse_header_int_or(&header, "MS2", 0, header_end_line)?;
    if n_orb == 0 {
        return Err(Error::parse(header_end_line, "NORB must be positive"));
    }
    if (n_elec + ms2) % 2 != 0 || n_elec < ms2.abs() {
        return Err(Error::parse(
            header_end_line,
            format!("inconsistent NELEC={n_elec} and MS2={ms2}"),
        ));
    }
    let n_alpha = ((n_elec + ms2) / 2) as usize;
    let n_beta = ((n_elec - ms2) / 2) as usize;
    if n_alpha > n_orb || n_beta > n_orb {
        return Err(Error::parse(
            header_end_line,
            format!("electron count exceeds NORB={n_orb}"),
        ));
    }

    let mut ints = IntegralSet::zeros(n_orb, n_alpha, n_beta);
    // Track whether a slot was set, to detect inconsistent duplicates.
    let mut h_set = Array2::from_elem((n_orb, n_orb), false);
    let mut g_set = Array4::from_elem((n_orb, n_orb, n_orb, n_orb), false);

    for (idx, line) in lines {
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let value_str = parts.next().unwrap();
        let value: f64 = value_str
            .replace(['D', 'd'], "E")
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad value '{value_str}'")))?;
        let mut idxs = [0usize; 4];
        for slot in idxs.iter_mut() {
            let tok = parts
                .next()
                .ok_or_else(|| Error::parse(lineno, "expected 4 orbital indices"))?;
            let v: i64 = tok
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad index '{tok}'")))?;
            if v < 0 || v as usize > n_orb {
                return Err(Error::parse(
                    lineno,
                    format!("orbital index {v} out of range 0..={n_orb}"),
                ));
            }
            *slot = v as usize;
        }
        if parts.next().is_some() {
            return Err(Error::parse(lineno, "trailing tokens after indices"));
        }
        let [i, j, k, l] = idxs;
        match (i, j, k, l) {
            (0, 0, 0, 0) => ints.e_nuc_ext = value,
            (_, _, 0, 0) if i > 0 && j > 0 => {
                let (p, q) = (i - 1, j - 1);
                for (a, b) in [(p, q), (q, p)] {
                    if h_set[[a, b]] && (ints.h[[a, b]] - value).abs() > SYMMETRY_TOL {
                        return Err(Error::Consistency(format!(
                            "line {lineno}: h[{a},{b}] duplicate disagrees: {} vs {value}",
                            ints.h[[a, b]]
                        )));
                    }
                    ints.h[[a, b]] = value;
                    h_set[[a, b]] = true;
                }
            }
            _ if i > 0 && j > 0 && k > 0 && l > 0 => {
                let (p, q, r, s) = (i - 1, j - 1, k - 1, l - 1);
                for (a, b) in [(p, q), (q, p)] {
                    for (c, d) in [(r, s), (s, r)] {
                        for (x, y) in [((a, b), (c, d)), ((c, d), (a, b))] {
                            let key = [x.0, x.1, y.0, y.1];
                            if g_set[key] && (ints.g[key] - value).abs() > SYMMETRY_TOL {
                                return Err(Error::Consistency(format!(
                                    "line {lineno}: g[{key:?}] duplicate disagrees: {} vs {value}",
                                    ints.g[key]
                                )));
                            }
                            ints.g[key] = value;
                            g_set[key] = true;
                        }
                    }
                }
            }
            _ => {
                return Err(Error::parse(
                    lineno,
                    format!("unsupported index pattern {i} {j} {k} {l}"),
                ));
            }
        }
    }
    Ok(ints)
}

fn parse_header_int(header: &str, key: &str, line: usize) -> Result<i64> {
    parse_header_int_opt(header, key, line)?
        .ok_or_else(|| Error::parse(line, format!("missing {key} in header")))
}

fn parse_header_int_or(header: &str, key: &str, default: i64, line: usize) -> Result<i64> {
    Ok(parse_header_int_opt(header, key, line)?.unwrap_or(default))
}

fn parse_header_int_opt(header: &str, key: &str, line: usize) -> Result<Option<i64>> {
    let Some(pos) = header.find(key) else {
        return Ok(None);
    };
    let rest = &header[pos + key.len()..];
    let rest = rest.trim_start();
    let rest = rest
        .strip_prefix('=')
        .ok_or_else(|| Error::parse(line, format!("malformed {key} assignment")))?;
    let tok: String = rest
        .trim_start()
        .chars()
        .take_while(|c| c.is_ascii_digit() || *c == '-' || *c == '+')
        .collect();
    tok.parse::<i64>()
        .map(Some)
        .map_err(|_| Error::parse(line, format!("malformed {key} value")))
}

/// Assemble the effective one-body matrix `kappa_pq = h_pq - 1/2 sum_r g_prrq`
/// and the external scalar. With no frozen core the scalar passes through
/// unchanged.
pub fn assemble_active(ints: &IntegralSet) -> ActiveHamiltonian {
    let n = ints.n_orb;
    let mut kappa = ints.h.clone();
    for p in 0..n {
        for q in 0..n {
            let mut acc = 0.0;
            for r in 0..n {
                acc += ints.g[[p, r, r, q]];
            }
            kappa[[p, q]] -= 0.5 * acc;
        }
    }
    ActiveHamiltonian {
        n_orb: n,
        e_ext: ints.e_nuc_ext,
        kappa,
        g: ints.g.clone(),
        n_alpha: ints.n_alpha,
        n_beta: ints.n_beta,
    }
}

/// Report the maximum deviation for each symmetry class of the tensors.
pub fn validate_symmetries(ints: &IntegralSet) -> SymmetryReport {
    let n = ints.n_orb;
    let h_symmetry = crate::linalg::max_asymmetry(ints.h.view());

    let mut g_images = [0.0f64; 7];
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let v = ints.g[[p, q, r, s]];
                    let images = [
                        ints.g[[q, p, r, s]],
                        ints.g[[p, q, s, r]],
                        ints.g[[q, p, s, r]],
                        ints.g[[r, s, p, q]],
                        ints.g[[s, r, p, q]],
                        ints.g[[r, s, q, p]],
                        ints.g[[s, r, q, p]],
                    ];
                    for (slot, img) in g_images.iter_mut().zip(images) {
                        *slot = slot.max((v - img).abs());
                    }
                }
            }
        }
    }

    // Pair-matrix symmetry is the rspq image viewed as a composite-index
    // matrix; track it separately since the eigendecomposition requires it.
    let mut pair_dev: f64 = 0.0;
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    pair_dev = pair_dev.max((ints.g[[p, q, r, s]] - ints.g[[r, s, p, q]]).abs());
                }
            }
        }
    }

    let mut report = SymmetryReport {
        h_symmetry,
        g_images,
        pair_matrix_symmetry: pair_dev,
        passed: true,
    };
    report.passed = report.max_deviation() <= SYMMETRY_TOL;
    report
}
