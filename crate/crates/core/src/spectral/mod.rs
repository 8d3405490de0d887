//! Dominant eigenvalues of truncated graphs by power iteration, with a
//! certified lower bound and warm-started ladders over BFS prefixes.
//!
//! The iteration runs on the largest strongly connected component that
//! carries a cycle. Its adjacency matrix is a principal submatrix of the
//! whole graph's, so any lower bound for it bounds the whole graph too. The
//! certificate is the Collatz–Wielandt ratio: if `v ≥ 0` is nonzero and
//! `(Mv)_i ≥ μ v_i` for all `i`, then the spectral radius of `M` is at
//! least `μ`.

mod scc;

use std::fmt::Write as _;

use crate::cayley::{self, Csr, GraphKind, TruncatedGraph};
use crate::error::{Error, Result};
use crate::groups::GroupId;

pub use scc::{components, largest_cyclic_component};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions {
    /// Stop once `‖Mv − μv‖∞ ≤ tol · μ · ‖v‖∞`.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            tol: 1e-10,
            max_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    /// Rayleigh-quotient estimate of the spectral radius.
    pub value: f64,
    /// Rigorous lower bound on the spectral radius.
    pub certified: f64,
    /// Collatz–Wielandt upper bound for the component that was iterated.
    pub component_upper: f64,
    pub iterations: usize,
    /// Relative residual `‖Mv − μv‖∞ / (μ‖v‖∞)` for the iterated matrix `M`.
    pub residual: f64,
    pub converged: bool,
    /// Iterate over all vertices, zero off the component, unit max entry.
    pub vector: Vec<f64>,
}

impl EigenResult {
    fn zero(n: usize) -> EigenResult {
        EigenResult {
            value: 0.0,
            certified: 0.0,
            component_upper: 0.0,
            iterations: 0,
            residual: 0.0,
            converged: true,
            vector: vec![0.0; n],
        }
    }
}

/// Neumaier-compensated dot product.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let term = x * y;
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Adjacency restricted to a vertex subset, renumbered.
struct LocalMatrix {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl LocalMatrix {
    fn new(adj: &Csr, vertices: &[u32]) -> LocalMatrix {
        let mut local = vec![u32::MAX; adj.vertices()];
        for (i, &v) in vertices.iter().enumerate() {
            local[v as usize] = i as u32;
        }
        let mut offsets = Vec::with_capacity(vertices.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for &v in vertices {
            for &t in adj.row(v as usize) {
                let l = local[t as usize];
                if l != u32::MAX {
                    targets.push(l);
                }
            }
            offsets.push(targets.len());
        }
        LocalMatrix { offsets, targets }
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.targets[self.offsets[i]..self.offsets[i + 1]]
                .iter()
                .map(|&t| v[t as usize])
                .sum();
        }
    }
}

/// Spectral radius of the whole adjacency matrix. `period` 2 iterates the
/// square and reports square roots. `start` (indexed by vertex) seeds the
/// iteration; missing or non-positive entries fall back to its smallest
/// positive entry, or to 1.
pub fn dominant_eigenvalue(
    adj: &Csr,
    period: u32,
    opts: PowerOptions,
    start: Option<&[f64]>,
) -> Result<EigenResult> {
    if period != 1 && period != 2 {
        return Err(Error::InvalidArgument(format!("period must be 1 or 2, got {period}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let n = adj.vertices();
    let Some(component) = largest_cyclic_component(adj) else {
        return Ok(EigenResult::zero(n));
    };
    let m = component.len();
    let matrix = LocalMatrix::new(adj, &component);

    let fill = start
        .and_then(|s| s.iter().copied().filter(|&x| x > 0.0).reduce(f64::min))
        .unwrap_or(1.0);
    let mut v: Vec<f64> = component
        .iter()
        .map(|&c| match start.and_then(|s| s.get(c as usize)) {
            Some(&x) if x > 0.0 => x,
            _ => fill,
        })
        .collect();
    normalize(&mut v);

    let mut half = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mut iterations = 0;
    let (mut mu, mut residual, mut lower, mut upper);
    loop {
        iterations += 1;
        if period == 2 {
            matrix.apply(&v, &mut half);
            matrix.apply(&half, &mut w);
        } else {
            matrix.apply(&v, &mut w);
        }
        mu = dot(&v, &w) / dot(&v, &v);
        let vmax = v.iter().copied().fold(0.0, f64::max);
        residual = v
            .iter()
            .zip(&w)
            .map(|(a, b)| (b - mu * a).abs())
            .fold(0.0, f64::max)
            / (vmax * mu.max(f64::MIN_POSITIVE));
        (lower, upper) = ratio_bounds(&v, &w);
        let converged = residual <= opts.tol;
        if converged || iterations >= opts.max_iterations {
            let mut vector = vec![0.0; n];
            for (&c, &x) in component.iter().zip(&v) {
                vector[c as usize] = x;
            }
            let root = |x: f64| if period == 2 { x.max(0.0).sqrt() } else { x };
            return Ok(EigenResult {
                value: root(mu),
                certified: root(lower),
                component_upper: root(upper),
                iterations,
                residual,
                converged,
                vector,
            });
        }
        std::mem::swap(&mut v, &mut w);
        normalize(&mut v);
    }
}

fn normalize(v: &mut [f64]) {
    let max = v.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        v.iter_mut().for_each(|x| *x /= max);
    }
}

/// `(min, max)` of `w_i / v_i` over `v_i > 0`.
fn ratio_bounds(v: &[f64], w: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (&a, &b) in v.iter().zip(w) {
        if a > 0.0 {
            let r = b / a;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    if lo.is_infinite() {
        (0.0, 0.0)
    } else {
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderPoint {
    pub n: usize,
    /// Largest certified bound over this and all smaller prefixes; valid
    /// because prefix graphs are nested and their spectral radii increase.
    pub certified: f64,
    /// Certified bound from this prefix alone.
    pub certified_here: f64,
    pub rayleigh: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ladder {
    pub points: Vec<LadderPoint>,
}

impl Ladder {
    /// Final certified value (0 for an empty ladder).
    pub fn value(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.certified)
    }

    pub fn all_converged(&self) -> bool {
        self.points.iter().all(|p| p.converged)
    }

    /// `(N, certified value)` pairs.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.n as f64, p.certified)).collect()
    }

    /// CSV with columns `N, 1/log N, <name>_N_certified, <name>_N_rayleigh,
    /// residual, iterations`.
    pub fn to_csv(&self, name: &str) -> String {
        let mut out = format!("N,1/log N,{name}_N_certified,{name}_N_rayleigh,residual,iterations\n");
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{:.12e},{:.12},{:.12},{:.3e},{}",
                p.n,
                1.0 / (p.n as f64).ln(),
                p.certified,
                p.rayleigh,
                p.residual,
                p.iterations
            );
        }
        out
    }
}

/// Eigenvalues of the leading principal submatrices at each checkpoint,
/// each warm-started from the previous eigenvector.
pub fn eigen_ladder(
    adj: &Csr,
    checkpoints: &[usize],
    period: u32,
    opts: PowerOptions,
) -> Result<Ladder> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("checkpoints must be strictly increasing".into()));
    }
    if let Some(&last) = checkpoints.last() {
        if last > adj.vertices() || checkpoints[0] == 0 {
            return Err(Error::InvalidArgument(format!(
                "checkpoints must lie in 1..={}",
                adj.vertices()
            )));
        }
    }
    let mut points = Vec::with_capacity(checkpoints.len());
    let mut warm: Option<Vec<f64>> = None;
    let mut best = 0.0f64;
    for &n in checkpoints {
        let sub = adj.prefix(n);
        let result = dominant_eigenvalue(&sub, period, opts, warm.as_deref())?;
        best = best.max(result.certified);
        points.push(LadderPoint {
            n,
            certified: best,
            certified_here: result.certified,
            rayleigh: result.value,
            residual: result.residual,
            iterations: result.iterations,
            converged: result.converged,
        });
        if result.vector.iter().any(|&x| x > 0.0) {
            warm = Some(result.vector);
        }
    }
    Ok(Ladder { points })
}

/// Certified lower bound on the cogrowth from the first `n` states of the
/// reduced-path graph.
pub fn certified_alpha_bound(g: GroupId, n: usize) -> Result<f64> {
    let h = cayley::build_h(g, n)?;
    Ok(dominant_eigenvalue(&h.adjacency, g.classify_period(), PowerOptions::default(), None)?.certified)
}

/// Certified lower bound on the return growth rate from `𝒢_N`.
pub fn certified_rho_bound(g: GroupId, n: usize) -> Result<f64> {
    let graph = cayley::build_g(g, n)?;
    Ok(dominant_eigenvalue(&graph.adjacency, g.classify_period(), PowerOptions::default(), None)?.certified)
}

/// Ladder over a graph's own checkpoint grid.
pub fn graph_ladder(graph: &TruncatedGraph, opts: PowerOptions) -> Result<Ladder> {
    eigen_ladder(&graph.adjacency, &graph.checkpoints, graph.group.classify_period(), opts)
}

/// Column name used for ladders of each graph kind.
pub fn value_name(kind: GraphKind) -> &'static str {
    match kind {
        GraphKind::G => "rho",
        GraphKind::H => "alpha",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::{build, build_g, build_h, reduced_path_graph, Budget, Limit};
    use proptest::prelude::*;

    fn solve(adj: &Csr, period: u32) -> EigenResult {
        dominant_eigenvalue(adj, period, PowerOptions::default(), None).unwrap()
    }

    #[test]
    fn complete_graph_on_three_vertices() {
        let adj = Csr::from_edges(3, &[(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)]).unwrap();
        let r = solve(&adj, 1);
        assert!(r.converged);
        assert!((r.value - 2.0).abs() < 1e-9);
        assert!(r.certified <= 2.0 + 1e-12 && r.certified > 2.0 - 1e-9);
    }

    #[test]
    fn directed_two_cycle() {
        let adj = Csr::from_edges(2, &[(0, 1), (1, 0)]).unwrap();
        let r = solve(&adj, 2);
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!((r.certified - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oscillation_is_flagged_but_still_certified() {
        // a bipartite cycle iterated as if aperiodic never settles
        let adj = Csr::from_edges(2, &[(0, 1), (1, 0)]).unwrap();
        let opts = PowerOptions {
            max_iterations: 50,
            ..PowerOptions::default()
        };
        let r = dominant_eigenvalue(&adj, 1, opts, Some(&[1.0, 0.5])).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 50);
        assert!(r.certified <= 1.0);
    }

    #[test]
    fn free_group_reduced_graph_is_nilpotent() {
        let h = build_h(GroupId::Free2, 1000).unwrap();
        let r = solve(&h.adjacency, 2);
        assert_eq!((r.value, r.certified), (0.0, 0.0));
        assert_eq!(certified_alpha_bound(GroupId::Free2, 500).unwrap(), 0.0);
    }

    #[test]
    fn bad_arguments() {
        let adj = Csr::from_edges(2, &[(0, 1), (1, 0)]).unwrap();
        assert!(dominant_eigenvalue(&adj, 3, PowerOptions::default(), None).is_err());
        let opts = PowerOptions {
            tol: 0.0,
            ..PowerOptions::default()
        };
        assert!(dominant_eigenvalue(&adj, 1, opts, None).is_err());
        assert!(eigen_ladder(&adj, &[2, 1], 2, PowerOptions::default()).is_err());
        assert!(eigen_ladder(&adj, &[1, 3], 2, PowerOptions::default()).is_err());
        assert!(eigen_ladder(&adj, &[0, 1], 2, PowerOptions::default()).is_err());
    }

    #[test]
    fn bounds_are_ordered_and_tight() {
        for g in [GroupId::ZxZ, GroupId::ThompsonF, GroupId::BaumslagSolitar { p: 2, q: 3 }] {
            for (kind, degree) in [(GraphKind::G, 4.0), (GraphKind::H, 3.0)] {
                let graph = build(g, kind, Limit::vertices(5000), Budget::default()).unwrap();
                let r = solve(&graph.adjacency, g.classify_period());
                assert!(r.converged, "{g} {kind:?}");
                assert!(r.certified <= r.value + 1e-12);
                assert!(r.value <= r.component_upper + 1e-12);
                assert!(r.component_upper <= degree);
                assert!(r.component_upper - r.certified <= 10.0 * r.value * 1e-10 + 1e-12);
            }
        }
    }

    #[test]
    fn thompson_bound_small_ball() {
        let h = build(GroupId::ThompsonF, GraphKind::H, Limit::depth(7), Budget::default()).unwrap();
        let bound = solve(&h.adjacency, 2).certified;
        assert!(bound > 0.0 && bound <= 2.17330, "{bound}");
        let z = certified_alpha_bound(GroupId::ZxZ, 3000).unwrap();
        assert!(z > 0.0 && z < 3.0);
    }

    #[test]
    fn ladders_are_monotone_and_match_cold_starts() {
        let graph = build_h(GroupId::BaumslagSolitar { p: 2, q: 2 }, 20_000).unwrap();
        let ladder = graph_ladder(&graph, PowerOptions::default()).unwrap();
        assert_eq!(ladder.points.len(), graph.checkpoints.len());
        assert!(ladder.points.windows(2).all(|w| w[0].certified <= w[1].certified));
        assert!(ladder.all_converged());
        assert!(ladder.value() <= 3.0);
        let cold = solve(&graph.adjacency, 2);
        assert!((cold.certified - ladder.points.last().unwrap().certified_here).abs() < 1e-8);
        let csv = ladder.to_csv("alpha");
        assert!(csv.starts_with("N,1/log N,alpha_N_certified,alpha_N_rayleigh,residual,iterations\n"));
        assert_eq!(csv.lines().count(), ladder.points.len() + 1);
    }

    #[test]
    fn return_rate_is_bounded_by_the_reduced_rate() {
        for g in [GroupId::ZxZ, GroupId::BaumslagSolitar { p: 1, q: 2 }] {
            for n in [200, 2000, 20_000] {
                let graph = build_g(g, n).unwrap();
                let rho = solve(&graph.adjacency, g.classify_period()).value;
                let reduced = reduced_path_graph(&graph).unwrap();
                let alpha = solve(&reduced.adjacency, g.classify_period()).value;
                assert!(alpha > 3f64.sqrt(), "{g} N={n} α={alpha}");
                assert!(rho <= (alpha * alpha + 3.0) / alpha + 1e-9, "{g} N={n} ρ={rho} α={alpha}");
            }
        }
    }

    /// `‖A^(2^m)‖^(1/2^m)` in the max-row-sum norm, an upper bound on the
    /// spectral radius for every `m`.
    fn norm_power_bound(adj: &Csr, m: u32) -> f64 {
        let n = adj.vertices();
        let mut a = vec![vec![0.0f64; n]; n];
        for v in 0..n {
            for &t in adj.row(v) {
                a[v][t as usize] += 1.0;
            }
        }
        let norm = |a: &Vec<Vec<f64>>| a.iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max);
        // a = A^(2^k) / exp(log_scale)
        let mut log_scale = 0.0f64;
        for _ in 0..m {
            let mut sq = vec![vec![0.0f64; n]; n];
            for i in 0..n {
                for k in 0..n {
                    if a[i][k] != 0.0 {
                        for j in 0..n {
                            sq[i][j] += a[i][k] * a[k][j];
                        }
                    }
                }
            }
            log_scale *= 2.0;
            let s = norm(&sq);
            if s == 0.0 {
                return 0.0;
            }
            sq.iter_mut().flatten().for_each(|x| *x /= s);
            log_scale += s.ln();
            a = sq;
        }
        (log_scale / 2f64.powi(m as i32)).exp()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn certificate_never_exceeds_true_radius(
            n in 2usize..9,
            edges in proptest::collection::vec((0u32..9, 0u32..9), 1..30),
        ) {
            let edges: Vec<(u32, u32)> = edges
                .into_iter()
                .map(|(a, b)| (a % n as u32, b % n as u32))
                .collect();
            let adj = Csr::from_edges(n, &edges).unwrap();
            let upper = norm_power_bound(&adj, 30);
            let opts = PowerOptions { tol: 1e-12, max_iterations: 5_000 };
            for period in [1, 2] {
                let r = dominant_eigenvalue(&adj, period, opts, None).unwrap();
                prop_assert!(r.certified <= upper * (1.0 + 1e-9), "{} > {}", r.certified, upper);
            }
        }
    }
}
