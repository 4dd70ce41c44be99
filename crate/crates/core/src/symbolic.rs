//! Inverse branches, the trap region `{G < t*}` and its preimage pieces,
//! itineraries, and the numerical check that the Julia set is coded by the
//! full one-sided shift on `d` symbols.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{pair, Complex, MapParams, ROOT_TOL};
use crate::orbits::{classify_orbit, ClassifierConfig};
use crate::potential::{escape_window, green_floor, green_infinity};
use crate::raster::{label_components, par_map, Connectivity, Grid, Window};

/// Marks pixels outside every preimage component.
pub const NO_SYMBOL: u8 = u8::MAX;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InverseBranchResult {
    #[serde(with = "pair::vec")]
    pub preimages: Vec<Complex>,
    pub residuals: Vec<f64>,
}

/// All `d` solutions of `f(z) = y`, with multiplicity.
pub fn preimages(p: &MapParams, y: Complex) -> Result<InverseBranchResult> {
    let roots = p.preimage_polynomial(y).roots()?;
    let tol = ROOT_TOL * (1.0 + y.norm());
    let mut residuals = Vec::with_capacity(roots.len());
    for &z in &roots {
        let r = (p.eval_finite(z) - y).norm();
        if !(r <= tol) {
            return Err(Error::SolverFailure { what: "inverse branch", residual: r });
        }
        residuals.push(r);
    }
    Ok(InverseBranchResult { preimages: roots, residuals })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrapConfig {
    pub resolution: usize,
    /// Fixed window; by default the escape window, widened until `{G < t*}`
    /// stays clear of its border.
    pub window: Option<Window>,
}

impl Default for TrapConfig {
    fn default() -> Self {
        TrapConfig { resolution: 512, window: None }
    }
}

/// `Ω = {G < t*}` and the `d` components of `{G < t*/2}`, labelled by
/// symbol in canonical order (centroids sorted by real, then imaginary part).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrapRegion {
    pub degree: usize,
    pub t_star: f64,
    pub level_interval: (f64, f64),
    pub grid: Grid,
    #[serde(with = "pair::vec")]
    pub centroids: Vec<Complex>,
    #[serde(skip)]
    pub omega: Vec<bool>,
    /// Symbol per pixel of `{G < t*/2}`, [`NO_SYMBOL`] elsewhere.
    #[serde(skip)]
    pub symbols: Vec<u8>,
}

impl TrapRegion {
    pub fn component_count(&self) -> usize {
        self.centroids.len()
    }

    pub fn symbol_at(&self, z: Complex) -> Option<u8> {
        let (col, row) = self.grid.locate(z)?;
        let s = self.symbols[self.grid.index(col, row)];
        (s != NO_SYMBOL).then_some(s)
    }

    pub fn in_omega(&self, z: Complex) -> bool {
        self.grid.locate(z).is_some_and(|(col, row)| self.omega[self.grid.index(col, row)])
    }

    /// Same trap with symbol `s` renamed to `perm[s]`.
    pub fn relabel(&self, perm: &[u8]) -> TrapRegion {
        let mut out = self.clone();
        for s in out.symbols.iter_mut().filter(|s| **s != NO_SYMBOL) {
            *s = perm[*s as usize];
        }
        for (old, &new) in perm.iter().enumerate() {
            out.centroids[new as usize] = self.centroids[old];
        }
        out
    }

    /// Symbol of `z`, tolerating points that sit in a boundary pixel of their
    /// component: falls back to the 3×3 neighbourhood when `G(z) < t*/2`.
    fn lookup(&self, p: &MapParams, z: Complex) -> Option<u8> {
        if let Some(s) = self.symbol_at(z) {
            return Some(s);
        }
        let (col, row) = self.grid.locate(z)?;
        if green_floor(p, z, self.t_star * 1e-4) >= 0.5 * self.t_star {
            return None;
        }
        let mut found = None;
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                let (c, r) = (col as i64 + dc, row as i64 + dr);
                if c < 0 || r < 0 || c >= self.grid.width as i64 || r >= self.grid.height as i64 {
                    continue;
                }
                let s = self.symbols[self.grid.index(c as usize, r as usize)];
                if s == NO_SYMBOL {
                    continue;
                }
                match found {
                    None => found = Some(s),
                    Some(f) if f != s => return None,
                    _ => {}
                }
            }
        }
        found
    }
}

fn trap_on_window(p: &MapParams, window: Window, resolution: usize, t_star: f64) -> Result<(Grid, Vec<f64>)> {
    let grid = Grid::with_resolution(window, resolution)?;
    let values = grid.sample(|z| green_floor(p, z, t_star * 1e-4));
    Ok((grid, values))
}

fn border_clear(grid: &Grid, values: &[f64], t_star: f64) -> bool {
    let (w, h) = (grid.width, grid.height);
    (0..w).all(|c| values[c] >= t_star && values[(h - 1) * w + c] >= t_star)
        && (0..h).all(|r| values[r * w] >= t_star && values[r * w + w - 1] >= t_star)
}

/// Builds the trap for a map whose finite critical points all escape.
pub fn build_trap(p: &MapParams, cfg: &TrapConfig) -> Result<TrapRegion> {
    let ccfg = ClassifierConfig::default();
    let crit = p.critical_points()?.points();
    let mut levels = Vec::with_capacity(crit.len());
    for &c in &crit {
        if !classify_orbit(p, c, &ccfg).escapes() {
            return Err(Error::HypothesisFailed(format!(
                "critical point {:.6}{:+.6}i is not attracted to infinity",
                c.re, c.im
            )));
        }
        levels.push(2.0 * green_infinity(p, c, ccfg.max_iter)?.value);
    }
    let max_v = levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_v = levels.iter().copied().fold(f64::INFINITY, f64::min);
    let (lower, upper) = (0.5 * max_v, min_v);
    if !(lower < upper) {
        return Err(Error::LevelIntervalEmpty { lower, upper });
    }
    let t_star = 0.5 * (lower + upper);
    build_trap_at(p, cfg, t_star, (lower, upper))
}

fn build_trap_at(p: &MapParams, cfg: &TrapConfig, t_star: f64, interval: (f64, f64)) -> Result<TrapRegion> {
    let d = p.degree();
    let (grid, values) = match cfg.window {
        Some(w) => trap_on_window(p, w, cfg.resolution, t_star)?,
        None => {
            let mut window = escape_window(p);
            let mut attempt = 0;
            loop {
                let (g, v) = trap_on_window(p, window, cfg.resolution, t_star)?;
                if border_clear(&g, &v, t_star) {
                    break (g, v);
                }
                attempt += 1;
                if attempt > 4 {
                    return Err(Error::Invalid("trap region does not fit the window".into()));
                }
                window = Window::square(Complex::new(0.0, 0.0), 1.5 * window.re_max)?;
            }
        }
    };
    let omega: Vec<bool> = values.iter().map(|&g| g < t_star).collect();
    let inner: Vec<bool> = values.iter().map(|&g| g < 0.5 * t_star).collect();
    let comps = label_components(&inner, grid.width, grid.height, Connectivity::Four);
    if comps.count() != d {
        return Err(Error::ComponentCountMismatch { expected: d, found: comps.count() });
    }
    let mut sums = vec![(Complex::new(0.0, 0.0), 0usize); d];
    for (i, &l) in comps.labels.iter().enumerate() {
        if l > 0 {
            let e = &mut sums[l as usize - 1];
            e.0 += grid.center_of_index(i);
            e.1 += 1;
        }
    }
    let raw: Vec<Complex> = sums.iter().map(|(s, n)| s / *n as f64).collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| raw[i].re.total_cmp(&raw[j].re).then(raw[i].im.total_cmp(&raw[j].im)));
    let mut symbol_of = vec![0u8; d];
    for (sym, &i) in order.iter().enumerate() {
        symbol_of[i] = sym as u8;
    }
    let symbols: Vec<u8> =
        comps.labels.iter().map(|&l| if l == 0 { NO_SYMBOL } else { symbol_of[l as usize - 1] }).collect();
    let centroids = order.iter().map(|&i| raw[i]).collect();

    // Each piece must map into Ω; checked on a spread of its pixels.
    let step = (grid.len() / 4096).max(1);
    for i in (0..grid.len()).step_by(step).filter(|&i| symbols[i] != NO_SYMBOL) {
        let z = p.eval_finite(grid.center_of_index(i));
        if green_floor(p, z, t_star * 1e-4) >= t_star {
            return Err(Error::HypothesisFailed("a preimage piece is not mapped into the trap".into()));
        }
    }
    Ok(TrapRegion { degree: d, t_star, level_interval: interval, grid, centroids, omega, symbols })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShiftConfig {
    pub depth: usize,
    /// Exhaustive exploration when `d^depth` does not exceed this; otherwise
    /// this many seeded random words.
    pub samples: usize,
    pub seed: u64,
    /// Re-look up every leaf symbol on a trap built at twice the resolution.
    pub recheck: bool,
}

impl Default for ShiftConfig {
    fn default() -> Self {
        ShiftConfig { depth: 10, samples: 100_000, seed: 0, recheck: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CodingReport {
    pub component_count: usize,
    pub transition_matrix: Vec<Vec<bool>>,
    pub full_shift: bool,
    /// Largest diameter of a length-`n` cylinder, `n = 1, 2, …`, measured
    /// on the leaves of the backward tree.
    pub cylinder_diameters: Vec<f64>,
    pub contraction_ratio: f64,
    pub injectivity_samples: usize,
    pub words: usize,
    pub exhaustive: bool,
    pub min_separation: f64,
    pub recheck_mismatches: usize,
    #[serde(with = "pair")]
    pub base_point: Complex,
    pub t_star: f64,
}

struct Node {
    z: Complex,
    word: Vec<u8>,
}

/// Separation below which two leaves count as the same point.
pub const INJECTIVITY_GAP: f64 = 10.0 * ROOT_TOL;

fn word_string(w: &[u8]) -> String {
    w.iter().map(|s| char::from(b'0' + *s)).collect()
}

/// All preimages of `node`, each tagged with its symbol prepended to the word.
fn children(p: &MapParams, trap: &TrapRegion, node: &Node) -> Result<Vec<Node>> {
    let pre = preimages(p, node.z)?;
    let mut out: Vec<Node> = Vec::with_capacity(pre.preimages.len());
    for y in pre.preimages {
        let s = trap.lookup(p, y).ok_or_else(|| Error::EscapeFromTrap { word: word_string(&node.word) })?;
        if out.iter().any(|n| n.word[0] == s) {
            return Err(Error::HypothesisFailed(format!(
                "two inverse branches of word '{}' share symbol {s}",
                word_string(&node.word)
            )));
        }
        let mut word = Vec::with_capacity(node.word.len() + 1);
        word.push(s);
        word.extend_from_slice(&node.word);
        out.push(Node { z: y, word });
    }
    out.sort_by_key(|n| n.word[0]);
    Ok(out)
}

fn branch(p: &MapParams, trap: &TrapRegion, node: &Node, symbol: u8) -> Result<Node> {
    children(p, trap, node)?
        .into_iter()
        .find(|n| n.word[0] == symbol)
        .ok_or_else(|| Error::EscapeFromTrap { word: word_string(&node.word) })
}

fn base_point(p: &MapParams, trap: &TrapRegion) -> Result<(Complex, u8)> {
    let mut fixed: Vec<Complex> = p.fixed_points()?.iter().filter_map(|f| f.point.finite()).collect();
    fixed.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    fixed
        .into_iter()
        .find_map(|z| trap.lookup(p, z).map(|s| (z, s)))
        .ok_or_else(|| Error::HypothesisFailed("no finite fixed point inside the trap".into()))
}

/// Explores the backward tree from a fixed point in the trap and checks
/// the coding by the full shift.
pub fn verify_full_shift(p: &MapParams, trap: &TrapRegion, cfg: &ShiftConfig) -> Result<CodingReport> {
    let d = trap.degree;
    if cfg.depth < 2 {
        return Err(Error::Invalid("depth must be at least 2".into()));
    }
    let (base, base_symbol) = base_point(p, trap)?;
    let root = Node { z: base, word: Vec::new() };
    let mut matrix = vec![vec![false; d]; d];
    let total = (d as f64).powi(cfg.depth as i32);
    let exhaustive = total <= cfg.samples as f64;

    let leaves: Vec<Node> = if exhaustive {
        let mut level = vec![root];
        for _ in 0..cfg.depth {
            let next = par_map(&level, |n| children(p, trap, n));
            let mut flat = Vec::with_capacity(level.len() * d);
            for (parent, kids) in level.iter().zip(next) {
                let to = parent.word.first().copied().unwrap_or(base_symbol);
                for k in kids? {
                    matrix[k.word[0] as usize][to as usize] = true;
                    flat.push(k);
                }
            }
            level = flat;
        }
        level
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut words: Vec<Vec<u8>> =
            (0..cfg.samples).map(|_| (0..cfg.depth).map(|_| rng.gen_range(0..d) as u8).collect()).collect();
        words.sort();
        words.dedup();
        let walked = par_map(&words, |w| -> Result<(Node, Vec<(u8, u8)>)> {
            let mut node = Node { z: base, word: Vec::new() };
            let mut edges = Vec::with_capacity(w.len());
            for &s in w.iter().rev() {
                let to = node.word.first().copied().unwrap_or(base_symbol);
                node = branch(p, trap, &node, s)?;
                edges.push((s, to));
            }
            Ok((node, edges))
        });
        let mut out = Vec::with_capacity(words.len());
        for r in walked {
            let (node, edges) = r?;
            for (from, to) in edges {
                matrix[from as usize][to as usize] = true;
            }
            out.push(node);
        }
        out
    };

    let cylinder_diameters = cylinder_diameters(&leaves, cfg.depth);
    let contraction_ratio = fit_ratio(&cylinder_diameters);
    let points: Vec<Complex> = leaves.iter().map(|n| n.z).collect();
    let (separated, min_separation) = separation(&points, INJECTIVITY_GAP);

    let recheck_mismatches = if cfg.recheck {
        let fine = build_trap_at(
            p,
            &TrapConfig { resolution: 2 * trap.grid.width.max(trap.grid.height), window: Some(trap.grid.window) },
            trap.t_star,
            trap.level_interval,
        )?;
        leaves.iter().filter(|n| fine.lookup(p, n.z) != Some(n.word[0])).count()
    } else {
        0
    };

    let decreasing = cylinder_diameters.windows(2).all(|w| w[1] < w[0]);
    let full_shift = trap.component_count() == d
        && matrix.iter().flatten().all(|&t| t)
        && !cylinder_diameters.is_empty()
        && decreasing
        && contraction_ratio < 0.95
        && separated == leaves.len()
        && recheck_mismatches == 0;
    Ok(CodingReport {
        component_count: trap.component_count(),
        transition_matrix: matrix,
        full_shift,
        cylinder_diameters,
        contraction_ratio,
        injectivity_samples: separated,
        words: leaves.len(),
        exhaustive,
        min_separation,
        recheck_mismatches,
        base_point: base,
        t_star: trap.t_star,
    })
}

/// Diameters of cylinders of length `1..depth`, skipping lengths where every
/// cylinder holds a single leaf.
fn cylinder_diameters(leaves: &[Node], depth: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for n in 1..depth {
        let mut groups: BTreeMap<&[u8], Vec<Complex>> = BTreeMap::new();
        for l in leaves {
            groups.entry(&l.word[..n]).or_default().push(l.z);
        }
        let mut best: Option<f64> = None;
        for pts in groups.values().filter(|g| g.len() > 1) {
            let d = diameter(pts);
            best = Some(best.map_or(d, |b: f64| b.max(d)));
        }
        match best {
            Some(d) => out.push(d),
            None => break,
        }
    }
    out
}

/// Exact diameter of a point set via its convex hull.
pub fn diameter(points: &[Complex]) -> f64 {
    let hull = convex_hull(points);
    let mut best: f64 = 0.0;
    for (i, a) in hull.iter().enumerate() {
        for b in &hull[i + 1..] {
            best = best.max((a - b).norm());
        }
    }
    best
}

fn convex_hull(points: &[Complex]) -> Vec<Complex> {
    let mut pts: Vec<Complex> = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Complex, a: Complex, b: Complex| (a - o).re * (b - o).im - (a - o).im * (b - o).re;
    let mut hull: Vec<Complex> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Complex>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &z in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], z) <= 0.0 {
                hull.pop();
            }
            hull.push(z);
        }
        hull.pop();
    }
    if hull.is_empty() {
        // All points collinear; the extremes remain.
        return vec![pts[0], pts[pts.len() - 1]];
    }
    hull
}

/// Least-squares ratio `ρ` in `diam_n ≈ C ρ^n`.
fn fit_ratio(diams: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> =
        diams.iter().enumerate().filter(|(_, d)| **d > 0.0).map(|(i, d)| ((i + 1) as f64, d.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    (sxy / sxx).exp()
}

/// Number of points whose nearest neighbour is farther than `gap`, and the
/// smallest pairwise distance.
fn separation(points: &[Complex], gap: f64) -> (usize, f64) {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&i, &j| points[i].re.total_cmp(&points[j].re));
    let mut close = vec![false; points.len()];
    let mut min = f64::INFINITY;
    for a in 0..idx.len() {
        let za = points[idx[a]];
        for &j in &idx[a + 1..] {
            let zb = points[j];
            let dre = zb.re - za.re;
            if dre >= min.max(gap) {
                break;
            }
            let dist = (zb - za).norm();
            min = min.min(dist);
            if dist <= gap {
                close[idx[a]] = true;
                close[j] = true;
            }
        }
    }
    (close.iter().filter(|c| !**c).count(), min)
}

/// Itinerary of `z` of length `n` as a string over `0..d`.
pub fn code_point(p: &MapParams, trap: &TrapRegion, z: Complex, n: usize) -> Result<String> {
    let mut z = z;
    let mut out = String::with_capacity(n);
    for k in 0..n {
        if !trap.in_omega(z) {
            return Err(Error::LeftTrap(k));
        }
        let s = trap.lookup(p, z).ok_or(Error::LeftTrap(k))?;
        out.push(char::from(b'0' + s));
        z = p.eval_finite(z);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn cantor() -> MapParams {
        MapParams::quadratic(c(-6.0, 0.0))
    }

    #[test]
    fn preimages_are_right_inverses() {
        let p = MapParams::real(1.719727, 0.3142117, -3.121092).unwrap();
        for z0 in [c(0.3, 0.2), c(-1.5, 0.7), c(2.5, -0.1)] {
            let r = preimages(&p, p.eval_finite(z0)).unwrap();
            assert_eq!(r.preimages.len(), 3);
            assert!(r.preimages.iter().any(|z| (z - z0).norm() < 1e-8));
        }
    }

    #[test]
    fn critical_value_gives_double_root() {
        let p = MapParams::real(1.719727, 0.3142117, -3.121092).unwrap();
        let u = p.critical_points().unwrap().points()[0];
        let poly = p.preimage_polynomial(p.eval_finite(u));
        // Discriminant of the monic cubic z^3 + B z^2 + C z + D.
        let k = poly.coeffs();
        let (bb, cc, dd) = (k[2], k[1], k[0]);
        let disc = bb * bb * cc * cc - 4.0 * cc * cc * cc - 4.0 * bb * bb * bb * dd - 27.0 * dd * dd
            + 18.0 * bb * cc * dd;
        assert!(disc.norm() < 1e-8, "{disc}");
        let r = preimages(&p, p.eval_finite(u)).unwrap();
        assert_eq!(r.preimages.iter().filter(|z| (*z - u).norm() < 1e-6).count(), 2);
    }

    #[test]
    fn degenerate_preimages() {
        let r = preimages(&cantor(), c(1.0, 0.0)).unwrap();
        assert_eq!(r.preimages.len(), 2);
        assert!(r.preimages.iter().any(|z| (z - c(7f64.sqrt(), 0.0)).norm() < 1e-12));
    }

    #[test]
    fn cantor_trap_has_two_pieces() {
        let t = build_trap(&cantor(), &TrapConfig::default()).unwrap();
        assert_eq!(t.component_count(), 2);
        assert!(t.level_interval.0 < t.t_star && t.t_star < t.level_interval.1);
        // Direct oracle: G(-6) = 2 G(0) from escape time.
        let g0 = green_infinity(&cantor(), c(0.0, 0.0), 100).unwrap().value;
        assert!((t.level_interval.1 - 2.0 * g0).abs() < 1e-12);
        assert!(t.centroids[0].re < 0.0 && t.centroids[1].re > 0.0);
    }

    #[test]
    fn intro_map_fails_hypothesis() {
        let p = MapParams::real(1.719727, 0.3142117, -3.121092).unwrap();
        assert!(matches!(build_trap(&p, &TrapConfig::default()), Err(Error::HypothesisFailed(_))));
    }

    /// Real intervals of the Cantor construction for `z^2 - 6` on `[-3, 3]`,
    /// indexed by itinerary.
    fn cantor_interval(word: &[u8]) -> (f64, f64) {
        let mut iv = (-3.0f64, 3.0f64);
        for &s in word.iter().rev() {
            let (lo, hi) = ((iv.0 + 6.0).sqrt(), (iv.1 + 6.0).sqrt());
            iv = if s == 0 { (-hi, -lo) } else { (lo, hi) };
        }
        iv
    }

    #[test]
    fn cantor_full_shift_matches_interval_oracle() {
        let p = cantor();
        let trap = build_trap(&p, &TrapConfig::default()).unwrap();
        let cfg = ShiftConfig { recheck: false, ..ShiftConfig::default() };
        let rep = verify_full_shift(&p, &trap, &cfg).unwrap();
        assert!(rep.full_shift, "{rep:?}");
        assert_eq!(rep.words, 1024);
        assert!(rep.contraction_ratio < 0.95);
        let base = Node { z: rep.base_point, word: vec![] };
        let mut level = vec![base];
        for _ in 0..10 {
            level = level.iter().flat_map(|n| children(&p, &trap, n).unwrap()).collect();
        }
        for leaf in &level {
            let (lo, hi) = cantor_interval(&leaf.word);
            assert!(leaf.z.im.abs() < 1e-12 && leaf.z.re >= lo - 1e-12 && leaf.z.re <= hi + 1e-12);
        }
        for (n, d) in rep.cylinder_diameters.iter().enumerate() {
            let widest = (0..1u32 << (n + 1))
                .map(|m| {
                    let w: Vec<u8> = (0..=n).map(|i| ((m >> i) & 1) as u8).collect();
                    let iv = cantor_interval(&w);
                    iv.1 - iv.0
                })
                .fold(0.0, f64::max);
            assert!(*d <= widest + 1e-12);
        }
    }

    #[test]
    fn depth_one_matrix_is_direct_reachability() {
        let p = cantor();
        let trap = build_trap(&p, &TrapConfig { resolution: 256, window: None }).unwrap();
        let cfg = ShiftConfig { depth: 2, recheck: false, ..ShiftConfig::default() };
        let rep = verify_full_shift(&p, &trap, &cfg).unwrap();
        let mut direct = vec![vec![false; 2]; 2];
        for (i, cen) in trap.centroids.iter().enumerate() {
            let z = crate::orbits::refine_cycle(&p, *cen, 1, 30).map(|r| r.0[0]).unwrap_or(*cen);
            let si = trap.lookup(&p, z).unwrap_or(i as u8);
            for y in preimages(&p, z).unwrap().preimages {
                direct[trap.lookup(&p, y).unwrap() as usize][si as usize] = true;
            }
        }
        assert_eq!(rep.transition_matrix, direct);
    }

    #[test]
    fn relabelling_permutes_symbols() {
        let p = cantor();
        let trap = build_trap(&p, &TrapConfig { resolution: 256, window: None }).unwrap();
        let swapped = trap.relabel(&[1, 0]);
        let z = c(3.0, 0.0);
        assert_eq!(code_point(&p, &trap, z, 4).unwrap(), "1111");
        assert_eq!(code_point(&p, &swapped, z, 4).unwrap(), "0000");
        assert_eq!(swapped.centroids[0], trap.centroids[1]);
    }

    #[test]
    fn itinerary_shift_equivariance() {
        let p = cantor();
        let trap = build_trap(&p, &TrapConfig { resolution: 256, window: None }).unwrap();
        assert_eq!(code_point(&p, &trap, c(-2.0, 0.0), 5).unwrap(), "00000");
        let leaf = branch(&p, &trap, &branch(&p, &trap, &Node { z: c(3.0, 0.0), word: vec![] }, 0).unwrap(), 1).unwrap();
        let full = code_point(&p, &trap, leaf.z, 6).unwrap();
        let shifted = code_point(&p, &trap, p.eval_finite(leaf.z), 5).unwrap();
        assert_eq!(&full[..2], "10");
        assert_eq!(&full[1..], shifted);
    }

    #[test]
    fn escaping_point_leaves_trap() {
        let p = cantor();
        let trap = build_trap(&p, &TrapConfig { resolution: 256, window: None }).unwrap();
        assert!(matches!(code_point(&p, &trap, c(0.0, 0.0), 3), Err(Error::LeftTrap(_))));
    }

    #[test]
    fn hull_diameter() {
        let pts = [c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.2), c(0.0, 1.0), c(1.0, 1.0)];
        assert!((diameter(&pts) - 2f64.sqrt()).abs() < 1e-15);
        let line = [c(0.0, 0.0), c(1.0, 0.0), c(3.0, 0.0)];
        assert!((diameter(&line) - 3.0).abs() < 1e-15);
    }
}
