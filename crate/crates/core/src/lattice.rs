//! Coupling tables for the triangular quasi-1D ladders, the hub-and-rim ring
//! and the periodic 2D torus.
//!
//! A [`LatticeSpec`] is the signed edge/triangle list that defines
//!
//! ```text
//! H(λ) = − Σ_bonds J_ij σ⃗_i·σ⃗_j  +  λ Σ_plaq X_ijk σ⃗_i·(σ⃗_j × σ⃗_k)
//! ```
//!
//! with `J_ij, X_ijk ∈ {+1, −1}` (absent couplings are zero). Plaquette
//! vertex order is semantically significant: the chirality operator is
//! invariant under cyclic rotation of `(i,j,k)` and flips sign under a
//! transposition, so each plaquette is stored in a canonical order that
//! preserves its orientation.

use thiserror::Error;

/// Site index, 0-based.
pub type Site = usize;

/// Signed Heisenberg bond `J_ij ∈ {+1, −1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub i: Site,
    pub j: Site,
    pub sign: i8,
}

/// Signed oriented chiral plaquette `X_ijk ∈ {+1, −1}`.
///
/// The vertex order `(i, j, k)` fixes the orientation of the three-spin
/// current; only the cyclic class matters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Plaquette {
    pub i: Site,
    pub j: Site,
    pub k: Site,
    pub sign: i8,
}

impl Plaquette {
    pub fn sites(&self) -> (Site, Site, Site) {
        (self.i, self.j, self.k)
    }

    fn site_set(&self) -> [Site; 3] {
        let mut s = [self.i, self.j, self.k];
        s.sort_unstable();
        s
    }
}

/// Which builder produced the spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryTag {
    LadderA { periodic: bool },
    LadderB { periodic: bool },
    LadderC,
    Ring,
    Torus { rows: usize, cols: usize },
}

/// Sites plus signed bond and plaquette coupling lists.
#[derive(Debug, Clone)]
pub struct LatticeSpec {
    pub n_sites: usize,
    pub bonds: Vec<Bond>,
    pub plaquettes: Vec<Plaquette>,
    pub tag: GeometryTag,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("type-A ladder with periodic boundary needs an even number of sites, got {0}: the alternating plaquette orientation (−1)^i is inconsistent around an odd cycle")]
    OddPeriodicLadderA(usize),
    #[error("geometry `{geometry}` needs at least {min} sites, got {got}")]
    TooFewSites {
        geometry: &'static str,
        min: usize,
        got: usize,
    },
    #[error("type-C ladder needs a multiple of 3 sites, got {0}")]
    NotMultipleOfThree(usize),
    #[error("torus needs rows ≥ 2 and cols ≥ 2, got {rows}x{cols}")]
    BadTorusShape { rows: usize, cols: usize },
    #[error("unrecognized geometry tag `{0}` (expected ladder-a:N[:open], ladder-b:N[:open], ladder-c:N, ring:N, torus:RxC)")]
    BadTag(String),
}

/// A single failed [`LatticeSpec`] invariant, reported by [`LatticeSpec::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    SiteOutOfRange { site: Site },
    DegenerateBond { i: Site, j: Site },
    DegeneratePlaquette { sites: [Site; 3] },
    DuplicateBond { i: Site, j: Site },
    DuplicatePlaquette { sites: [Site; 3] },
    BadBondSign { i: Site, j: Site, sign: i8 },
    BadPlaquetteSign { sites: [Site; 3], sign: i8 },
    PlaquetteEdgeMissing { sites: [Site; 3], edge: (Site, Site) },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::SiteOutOfRange { site } => write!(f, "site index {site} out of range"),
            Violation::DegenerateBond { i, j } => write!(f, "bond ({i},{j}) has equal endpoints"),
            Violation::DegeneratePlaquette { sites } => {
                write!(f, "plaquette {sites:?} has repeated sites")
            }
            Violation::DuplicateBond { i, j } => write!(f, "duplicate bond ({i},{j})"),
            Violation::DuplicatePlaquette { sites } => write!(f, "duplicate plaquette {sites:?}"),
            Violation::BadBondSign { i, j, sign } => {
                write!(f, "bond ({i},{j}) has sign {sign}, must be ±1")
            }
            Violation::BadPlaquetteSign { sites, sign } => {
                write!(f, "plaquette {sites:?} has sign {sign}, must be ±1")
            }
            Violation::PlaquetteEdgeMissing { sites, edge } => {
                write!(f, "plaquette {sites:?} edge ({},{}) is not a bond", edge.0, edge.1)
            }
        }
    }
}

impl LatticeSpec {
    /// Check every structural invariant; the returned list is empty iff the
    /// spec is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.n_sites;
        let mut bond_keys = std::collections::HashSet::new();
        for b in &self.bonds {
            for s in [b.i, b.j] {
                if s >= n {
                    out.push(Violation::SiteOutOfRange { site: s });
                }
            }
            if b.i == b.j {
                out.push(Violation::DegenerateBond { i: b.i, j: b.j });
            }
            if b.sign != 1 && b.sign != -1 {
                out.push(Violation::BadBondSign { i: b.i, j: b.j, sign: b.sign });
            }
            if !bond_keys.insert((b.i.min(b.j), b.i.max(b.j))) {
                out.push(Violation::DuplicateBond { i: b.i, j: b.j });
            }
        }
        let mut plq_keys = std::collections::HashSet::new();
        for p in &self.plaquettes {
            let set = p.site_set();
            for s in set {
                if s >= n {
                    out.push(Violation::SiteOutOfRange { site: s });
                }
            }
            if set[0] == set[1] || set[1] == set[2] {
                out.push(Violation::DegeneratePlaquette { sites: set });
                continue;
            }
            if p.sign != 1 && p.sign != -1 {
                out.push(Violation::BadPlaquetteSign { sites: set, sign: p.sign });
            }
            if !plq_keys.insert(set) {
                out.push(Violation::DuplicatePlaquette { sites: set });
            }
            for edge in [(set[0], set[1]), (set[0], set[2]), (set[1], set[2])] {
                if !bond_keys.contains(&edge) {
                    out.push(Violation::PlaquetteEdgeMissing { sites: set, edge });
                }
            }
        }
        out
    }

    /// Parse an external geometry tag: `ladder-a:N[:open]`, `ladder-b:N[:open]`,
    /// `ladder-c:N`, `ring:N`, `torus:RxC`.
    pub fn from_tag(tag: &str) -> Result<LatticeSpec, LatticeError> {
        let bad = || LatticeError::BadTag(tag.to_string());
        let parts: Vec<&str> = tag.split(':').collect();
        let parse_n = |s: &str| s.parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["ladder-a", n] => build_ladder_a(parse_n(n)?, true),
            ["ladder-a", n, "open"] => build_ladder_a(parse_n(n)?, false),
            ["ladder-b", n] => build_ladder_b(parse_n(n)?, true),
            ["ladder-b", n, "open"] => build_ladder_b(parse_n(n)?, false),
            ["ladder-c", n] => build_ladder_c(parse_n(n)?),
            ["ring", n] => build_ring(parse_n(n)?),
            ["torus", rc] => {
                let (r, c) = rc.split_once('x').ok_or_else(bad)?;
                build_torus(parse_n(r)?, parse_n(c)?)
            }
            _ => Err(bad()),
        }
    }

    /// Torus row/col shape, if this spec is a torus.
    pub fn torus_shape(&self) -> Option<(usize, usize)> {
        match self.tag {
            GeometryTag::Torus { rows, cols } => Some((rows, cols)),
            _ => None,
        }
    }

    /// The stored plaquette on a given site set, orientation included.
    pub fn find_plaquette(&self, sites: [Site; 3]) -> Option<&Plaquette> {
        let mut key = sites;
        key.sort_unstable();
        self.plaquettes.iter().find(|p| p.site_set() == key)
    }

    /// The stored bond between two sites.
    pub fn find_bond(&self, i: Site, j: Site) -> Option<&Bond> {
        self.bonds
            .iter()
            .find(|b| (b.i.min(b.j), b.i.max(b.j)) == (i.min(j), i.max(j)))
    }

    /// Periodic ring distance `min(Δ, N−Δ)` between two sites of a quasi-1D
    /// geometry, or the minimum-image grid distance on a torus.
    pub fn site_distance(&self, a: Site, b: Site) -> f64 {
        match self.tag {
            GeometryTag::Torus { rows, cols } => {
                let (ra, ca) = (a / cols, a % cols);
                let (rb, cb) = (b / cols, b % cols);
                let dr = wrapped_delta(ra, rb, rows);
                let dc = wrapped_delta(ca, cb, cols);
                ((dr * dr + dc * dc) as f64).sqrt()
            }
            _ => {
                let d = a.abs_diff(b);
                d.min(self.n_sites - d) as f64
            }
        }
    }

    /// Minimum-image distance between the centroids of two site groups
    /// (bonds or plaquettes).
    pub fn group_distance(&self, a: &[Site], b: &[Site]) -> f64 {
        match self.tag {
            GeometryTag::Torus { rows, cols } => {
                // centroid of the minimum-image representative around the
                // first site of each group
                let centroid = |g: &[Site]| -> (f64, f64) {
                    let (r0, c0) = (g[0] / cols, g[0] % cols);
                    let mut r_acc = 0.0;
                    let mut c_acc = 0.0;
                    for &s in g {
                        let (r, c) = (s / cols, s % cols);
                        r_acc += r0 as f64 + signed_wrap(r as i64 - r0 as i64, rows);
                        c_acc += c0 as f64 + signed_wrap(c as i64 - c0 as i64, cols);
                    }
                    (r_acc / g.len() as f64, c_acc / g.len() as f64)
                };
                let (ra, ca) = centroid(a);
                let (rb, cb) = centroid(b);
                let dr = torus_axis_distance(ra, rb, rows as f64);
                let dc = torus_axis_distance(ca, cb, cols as f64);
                (dr * dr + dc * dc).sqrt()
            }
            _ => {
                let ca = a.iter().sum::<usize>() as f64 / a.len() as f64;
                let cb = b.iter().sum::<usize>() as f64 / b.len() as f64;
                let d = (ca - cb).abs();
                d.min(self.n_sites as f64 - d)
            }
        }
    }
}

fn wrapped_delta(a: usize, b: usize, period: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(period - d)
}

fn signed_wrap(d: i64, period: usize) -> f64 {
    let p = period as i64;
    let mut d = d.rem_euclid(p);
    if d > p / 2 {
        d -= p;
    }
    d as f64
}

fn torus_axis_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).abs() % period;
    d.min(period - d)
}

/// Type-A ladder: rails `(i,i+2)`, zigzag rungs `(i,i+1)`, and one triangle
/// per site with alternating orientation `X = (−1)^i`.
///
/// Periodic boundaries require an even site count; an odd cycle cannot carry
/// the alternating orientation consistently.
pub fn build_ladder_a(n_sites: usize, periodic: bool) -> Result<LatticeSpec, LatticeError> {
    if periodic && n_sites % 2 != 0 {
        return Err(LatticeError::OddPeriodicLadderA(n_sites));
    }
    let min = if periodic { 6 } else { 3 };
    if n_sites < min {
        return Err(LatticeError::TooFewSites { geometry: "ladder-a", min, got: n_sites });
    }
    let mut bonds = Vec::new();
    let mut plaquettes = Vec::new();
    let last_rung = if periodic { n_sites } else { n_sites - 1 };
    for i in 0..last_rung {
        bonds.push(Bond { i, j: (i + 1) % n_sites, sign: 1 });
    }
    let last_rail = if periodic { n_sites } else { n_sites.saturating_sub(2) };
    for i in 0..last_rail {
        bonds.push(Bond { i, j: (i + 2) % n_sites, sign: 1 });
        plaquettes.push(Plaquette {
            i,
            j: (i + 1) % n_sites,
            k: (i + 2) % n_sites,
            sign: if i % 2 == 0 { 1 } else { -1 },
        });
    }
    Ok(LatticeSpec {
        n_sites,
        bonds,
        plaquettes,
        tag: GeometryTag::LadderA { periodic },
    })
}

/// Type-B ladder (sawtooth): zigzag chain `(i,i+1)`, lower rail `(2i,2i+2)`,
/// and the up-pointing triangles `(2i,2i+1,2i+2)` only, all with `X = +1`.
///
/// Relative to type A this drops the upper rail and every other plaquette.
pub fn build_ladder_b(n_sites: usize, periodic: bool) -> Result<LatticeSpec, LatticeError> {
    let min = if periodic { 4 } else { 3 };
    if n_sites < min {
        return Err(LatticeError::TooFewSites { geometry: "ladder-b", min, got: n_sites });
    }
    let mut bonds = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut push_bond = |bonds: &mut Vec<Bond>, i: Site, j: Site| {
        if seen.insert((i.min(j), i.max(j))) {
            bonds.push(Bond { i, j, sign: 1 });
        }
    };
    let mut plaquettes = Vec::new();
    let last_rung = if periodic { n_sites } else { n_sites - 1 };
    for i in 0..last_rung {
        push_bond(&mut bonds, i, (i + 1) % n_sites);
    }
    // base bonds and triangles start on even sites; an odd periodic chain
    // simply has no triangle across the seam
    let mut s = 0;
    while s + 2 <= if periodic { n_sites } else { n_sites - 1 } {
        push_bond(&mut bonds, s, (s + 2) % n_sites);
        plaquettes.push(Plaquette { i: s, j: (s + 1) % n_sites, k: (s + 2) % n_sites, sign: 1 });
        s += 2;
    }
    Ok(LatticeSpec {
        n_sites,
        bonds,
        plaquettes,
        tag: GeometryTag::LadderB { periodic },
    })
}

/// Type-C ladder: fully bonded triangles `{3k, 3k+1, 3k+2}` weakly linked by
/// bonds between consecutive middle sites, periodic, all `X = +1`.
pub fn build_ladder_c(n_sites: usize) -> Result<LatticeSpec, LatticeError> {
    if n_sites % 3 != 0 {
        return Err(LatticeError::NotMultipleOfThree(n_sites));
    }
    if n_sites < 3 {
        return Err(LatticeError::TooFewSites { geometry: "ladder-c", min: 3, got: n_sites });
    }
    let mut bonds = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let mut push_bond = |bonds: &mut Vec<Bond>, i: Site, j: Site| {
        if seen.insert((i.min(j), i.max(j))) {
            bonds.push(Bond { i, j, sign: 1 });
        }
    };
    let mut plaquettes = Vec::new();
    for i in 0..n_sites {
        match i % 3 {
            0 => {
                push_bond(&mut bonds, i, i + 1);
                push_bond(&mut bonds, i, i + 2);
                plaquettes.push(Plaquette { i, j: i + 1, k: i + 2, sign: 1 });
            }
            1 => {
                push_bond(&mut bonds, i, i + 1);
                if n_sites > 3 {
                    push_bond(&mut bonds, i, (i + 3) % n_sites);
                }
            }
            _ => {}
        }
    }
    Ok(LatticeSpec { n_sites, bonds, plaquettes, tag: GeometryTag::LadderC })
}

/// Hub-and-rim ring: site 0 bonded to every rim site, open rim chain
/// `(i,i+1)` for `i = 1..N−2`, triangles `(0,i,i+1)` with `X = +1`.
///
/// The rim is deliberately not closed: there is no `(N−1,1)` bond.
pub fn build_ring(n_sites: usize) -> Result<LatticeSpec, LatticeError> {
    if n_sites < 4 {
        return Err(LatticeError::TooFewSites { geometry: "ring", min: 4, got: n_sites });
    }
    let mut bonds = Vec::new();
    let mut plaquettes = Vec::new();
    for i in 1..n_sites {
        bonds.push(Bond { i: 0, j: i, sign: 1 });
    }
    for i in 1..n_sites - 1 {
        bonds.push(Bond { i, j: i + 1, sign: 1 });
        plaquettes.push(Plaquette { i: 0, j: i, k: i + 1, sign: 1 });
    }
    Ok(LatticeSpec { n_sites, bonds, plaquettes, tag: GeometryTag::Ring })
}

/// Periodic triangular torus on a rows×cols grid, row-major 0-based sites.
///
/// Each site bonds to its right, down, and down-right neighbors; each grid
/// cell carries two triangles whose stored vertex order gives every
/// plaquette the same rotational orientation (`X = +1`). Wrap-around
/// duplicates on 2-row or 2-column shapes collapse to multiplicity one.
pub fn build_torus(rows: usize, cols: usize) -> Result<LatticeSpec, LatticeError> {
    if rows < 2 || cols < 2 {
        return Err(LatticeError::BadTorusShape { rows, cols });
    }
    let site = |r: usize, c: usize| (r % rows) * cols + (c % cols);
    let mut bonds = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for r in 0..rows {
        for c in 0..cols {
            let a = site(r, c);
            for (r2, c2) in [(r, c + 1), (r + 1, c), (r + 1, c + 1)] {
                let b = site(r2, c2);
                if a != b && seen.insert((a.min(b), a.max(b))) {
                    bonds.push(Bond { i: a, j: b, sign: 1 });
                }
            }
        }
    }
    let mut plaquettes = Vec::new();
    let mut pseen = std::collections::HashSet::new();
    for r in 0..rows {
        for c in 0..cols {
            // both triangles traversed with positive signed area in
            // (col,row) coordinates
            let tris = [
                [(r, c), (r, c + 1), (r + 1, c + 1)],
                [(r, c), (r + 1, c + 1), (r + 1, c)],
            ];
            for tri in tris {
                let s: Vec<Site> = tri.iter().map(|&(a, b)| site(a, b)).collect();
                let mut key = [s[0], s[1], s[2]];
                key.sort_unstable();
                if key[0] != key[1] && key[1] != key[2] && pseen.insert(key) {
                    plaquettes.push(canonical_plaquette(s[0], s[1], s[2], 1));
                }
            }
        }
    }
    Ok(LatticeSpec { n_sites: rows * cols, bonds, plaquettes, tag: GeometryTag::Torus { rows, cols } })
}

/// Rotate the oriented triple so the smallest site index comes first; cyclic
/// rotations preserve the chirality orientation.
fn canonical_plaquette(i: Site, j: Site, k: Site, sign: i8) -> Plaquette {
    let (i, j, k) = if i <= j && i <= k {
        (i, j, k)
    } else if j <= i && j <= k {
        (j, k, i)
    } else {
        (k, i, j)
    };
    Plaquette { i, j, k, sign }
}

/// Site permutations for the two torus translations (one step down the rows,
/// one step along the columns). `perm[s]` is where site `s` moves.
pub fn torus_translations(spec: &LatticeSpec) -> Option<(Vec<Site>, Vec<Site>)> {
    let (rows, cols) = spec.torus_shape()?;
    let mut row_shift = vec![0; rows * cols];
    let mut col_shift = vec![0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            row_shift[r * cols + c] = ((r + 1) % rows) * cols + c;
            col_shift[r * cols + c] = r * cols + (c + 1) % cols;
        }
    }
    Some((row_shift, col_shift))
}
