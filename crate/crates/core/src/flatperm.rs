//! Flat-histogram sampling of random words by geodesic length, and plain
//! simple sampling of mean geodesic length.
//!
//! A tour grows a word one uniformly random letter at a time, carrying a
//! weight `W` (initially 1) and adding it to the bin `(n, ℓ)` of the current
//! length and geodesic length. With `r = W · tours / weight_sum[n][ℓ]`, a
//! sample with `r < prune_below` is dropped with probability ½ and otherwise
//! continues with weight `2W`; one with `r > enrich_above` is split into
//! `copies` copies of weight `W / copies`. Both moves preserve the expected
//! weight, so `(2k)^n · weight_sum[n][ℓ] / tours` estimates the number of
//! words of length `n` whose value has geodesic length `ℓ`.
//!
//! Tour `t` draws from random stream `t`, and worker `w` of `W` runs tours
//! `w, w + W, …` against its own histogram, so a run is a function of the
//! seed, the worker count and the tour count alone.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::GroupId;
use crate::metric::{geodesic_length, has_metric};
use crate::words::{random_symbol, rng_stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatPermConfig {
    pub max_len: usize,
    pub tours: u64,
    pub seed: u64,
    pub workers: usize,
    pub prune_below: f64,
    pub enrich_above: f64,
    pub copies: usize,
    /// Enrichment stops for the rest of a tour once it has produced this
    /// many samples. Pruning and plain growth are unaffected.
    pub max_tour_samples: u64,
}

impl FlatPermConfig {
    pub fn new(max_len: usize, tours: u64, seed: u64) -> Self {
        FlatPermConfig {
            max_len,
            tours,
            seed,
            workers: 1,
            prune_below: 0.5,
            enrich_above: 2.0,
            copies: 2,
            max_tour_samples: 1_000_000,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_len == 0 {
            return Err(Error::InvalidArgument("max_len must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidArgument("need at least one worker".into()));
        }
        if self.copies < 2 {
            return Err(Error::InvalidArgument("enrichment needs at least two copies".into()));
        }
        if !(self.prune_below > 0.0 && self.prune_below < self.enrich_above && self.enrich_above.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "thresholds must satisfy 0 < prune ({}) < enrich ({})",
                self.prune_below, self.enrich_above
            )));
        }
        Ok(())
    }
}

/// Accumulators indexed `[n][ℓ]` with `0 ≤ ℓ ≤ n ≤ max_len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramEstimate {
    pub group: GroupId,
    pub max_len: usize,
    pub alphabet_size: usize,
    /// Tours started.
    pub tours: u64,
    pub weight_sum: Vec<Vec<f64>>,
    /// Sum over tours of the squared weight each tour put in the bin.
    pub weight_sq: Vec<Vec<f64>>,
    pub visit_count: Vec<Vec<u64>>,
}

impl HistogramEstimate {
    pub fn new(group: GroupId, max_len: usize) -> Self {
        let tri = |_| (0..=max_len).map(|n| vec![Default::default(); n + 1]).collect();
        HistogramEstimate {
            group,
            max_len,
            alphabet_size: group.alphabet_size(),
            tours: 0,
            weight_sum: tri(()),
            weight_sq: tri(()),
            visit_count: (0..=max_len).map(|n| vec![0; n + 1]).collect(),
        }
    }

    /// `(2k)^n · weight_sum / tours`.
    pub fn c_hat(&self, n: usize, l: usize) -> f64 {
        if self.tours == 0 || l > n || n > self.max_len {
            return 0.0;
        }
        (self.alphabet_size as f64).powi(n as i32) * self.weight_sum[n][l] / self.tours as f64
    }

    /// Standard error of [`c_hat`](Self::c_hat) from the spread of
    /// per-tour bin weights.
    pub fn std_error(&self, n: usize, l: usize) -> f64 {
        if self.tours < 2 || l > n || n > self.max_len {
            return f64::INFINITY;
        }
        let t = self.tours as f64;
        let mean = self.weight_sum[n][l] / t;
        let var = (self.weight_sq[n][l] / t - mean * mean).max(0.0) * t / (t - 1.0);
        (self.alphabet_size as f64).powi(n as i32) * (var / t).sqrt()
    }

    /// `Σ_ℓ ĉ_{n,ℓ} / (2k)^n`, which has expectation 1.
    pub fn total_fraction(&self, n: usize) -> f64 {
        if self.tours == 0 {
            return 0.0;
        }
        self.weight_sum[n].iter().sum::<f64>() / self.tours as f64
    }

    pub fn merge(&mut self, other: &HistogramEstimate) -> Result<()> {
        if other.group != self.group || other.max_len != self.max_len {
            return Err(Error::InvalidArgument("histograms of different runs".into()));
        }
        self.tours += other.tours;
        for n in 0..=self.max_len {
            for l in 0..=n {
                self.weight_sum[n][l] += other.weight_sum[n][l];
                self.weight_sq[n][l] += other.weight_sq[n][l];
                self.visit_count[n][l] += other.visit_count[n][l];
            }
        }
        Ok(())
    }

    /// CSV `n,l,weight_sum,visits,c_hat,normalized` over visited bins with
    /// `n ≥ 1`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,l,weight_sum,visits,c_hat,normalized\n");
        for n in 1..=self.max_len {
            for l in 0..=n {
                if self.visit_count[n][l] > 0 {
                    writeln!(
                        out,
                        "{n},{l},{},{},{:e},{}",
                        self.weight_sum[n][l],
                        self.visit_count[n][l],
                        self.c_hat(n, l),
                        self.normalized(n, l)
                    )
                    .unwrap();
                }
            }
        }
        out
    }

    fn normalized(&self, n: usize, l: usize) -> f64 {
        self.weight_sum[n][l] / self.tours as f64 * (n as f64).sqrt()
    }

    fn record(&mut self, n: usize, l: usize, w: f64) {
        self.weight_sum[n][l] += w;
        self.visit_count[n][l] += 1;
    }
}

/// `(n, ℓ, ĉ_{n,ℓ} (2k)^{−n} √n)` over visited bins with `n ≥ 1`.
pub fn normalize_distribution(h: &HistogramEstimate) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    if h.tours == 0 {
        return out;
    }
    for n in 1..=h.max_len {
        for l in 0..=n {
            if h.visit_count[n][l] > 0 {
                out.push((n, l, h.normalized(n, l)));
            }
        }
    }
    out
}

/// Geodesic length of the heaviest bin at each length.
pub fn peak_positions(h: &HistogramEstimate) -> Vec<(usize, usize)> {
    (1..=h.max_len)
        .filter(|&n| h.visit_count[n].iter().any(|&v| v > 0))
        .map(|n| {
            let row = &h.weight_sum[n];
            let l = (0..=n).fold(0, |best, l| if row[l] > row[best] { l } else { best });
            (n, l)
        })
        .collect()
}

/// A resumable flat-histogram run: one histogram per worker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatPermRun {
    pub group: GroupId,
    pub config: FlatPermConfig,
    pub workers: Vec<HistogramEstimate>,
}

impl FlatPermRun {
    pub fn new(group: GroupId, config: FlatPermConfig) -> Result<Self> {
        config.validate()?;
        if !has_metric(group) {
            return Err(Error::MetricUnavailable(format!("no geodesic algorithm for {group}")));
        }
        Ok(FlatPermRun {
            group,
            config,
            workers: (0..config.workers).map(|_| HistogramEstimate::new(group, config.max_len)).collect(),
        })
    }

    pub fn tours_done(&self) -> u64 {
        self.workers.iter().map(|h| h.tours).sum()
    }

    /// Runs tours until `min(tours, config.tours)` have been done in total.
    pub fn run_until(&mut self, tours: u64) -> Result<()> {
        let target = tours.min(self.config.tours);
        let nw = self.workers.len() as u64;
        let share = |w: u64| target / nw + (w < target % nw) as u64;
        let (group, config) = (self.group, self.config);
        let results: Vec<Result<()>> = std::thread::scope(|scope| {
            let handles: Vec<_> = self
                .workers
                .iter_mut()
                .enumerate()
                .map(|(w, h)| {
                    let goal = share(w as u64);
                    scope.spawn(move || {
                        while h.tours < goal {
                            let t = w as u64 + nw * h.tours;
                            run_tour(group, &config, h, t)?;
                        }
                        Ok(())
                    })
                })
                .collect();
            handles.into_iter().map(|j| j.join().expect("worker panicked")).collect()
        });
        results.into_iter().collect()
    }

    pub fn run(&mut self) -> Result<()> {
        self.run_until(self.config.tours)
    }

    pub fn merged(&self) -> HistogramEstimate {
        let mut out = HistogramEstimate::new(self.group, self.config.max_len);
        for h in &self.workers {
            out.merge(h).expect("workers share one shape");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("histograms serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let run: FlatPermRun =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("flatperm resume file: {e}")))?;
        run.config.validate()?;
        let shaped = |h: &HistogramEstimate| {
            h.group == run.group
                && h.max_len == run.config.max_len
                && h.alphabet_size == run.group.alphabet_size()
                && [h.weight_sum.len(), h.weight_sq.len(), h.visit_count.len()] == [h.max_len + 1; 3]
                && (0..=h.max_len).all(|n| {
                    [h.weight_sum[n].len(), h.weight_sq[n].len(), h.visit_count[n].len()] == [n + 1; 3]
                })
                && h.weight_sum.iter().flatten().chain(h.weight_sq.iter().flatten()).all(|&w| w >= 0.0)
        };
        if run.workers.len() != run.config.workers || !run.workers.iter().all(shaped) {
            return Err(Error::Parse("flatperm resume file: histogram shape does not match its config".into()));
        }
        Ok(run)
    }
}

fn run_tour(group: GroupId, config: &FlatPermConfig, h: &mut HistogramEstimate, index: u64) -> Result<()> {
    let mut rng = rng_stream(config.seed, index);
    let size = group.alphabet_size();
    h.tours += 1;
    let tours = h.tours as f64;
    // weight this tour has put in each bin, for the error estimate
    let mut acc: Vec<(usize, usize, f64)> = Vec::new();
    let add = |acc: &mut Vec<(usize, usize, f64)>, n: usize, l: usize, w: f64| match acc
        .iter_mut()
        .find(|e| e.0 == n && e.1 == l)
    {
        Some(e) => e.2 += w,
        None => acc.push((n, l, w)),
    };

    h.record(0, 0, 1.0);
    add(&mut acc, 0, 0, 1.0);
    let mut samples = 1u64;
    let mut stack = vec![(group.identity(), 0usize, 1.0f64)];
    while let Some((mut x, n, w)) = stack.pop() {
        if n == config.max_len {
            continue;
        }
        x.apply(random_symbol(size, &mut rng));
        let n = n + 1;
        let l = geodesic_length(&x)? as usize;
        debug_assert!(l <= n);
        h.record(n, l, w);
        add(&mut acc, n, l, w);
        samples += 1;
        let r = w * tours / h.weight_sum[n][l];
        if r > config.enrich_above && samples < config.max_tour_samples {
            let part = w / config.copies as f64;
            for _ in 1..config.copies {
                stack.push((x.clone(), n, part));
            }
            stack.push((x, n, part));
        } else if r < config.prune_below {
            if rng.gen_bool(0.5) {
                stack.push((x, n, 2.0 * w));
            }
        } else {
            stack.push((x, n, w));
        }
    }
    for (n, l, w) in acc {
        h.weight_sq[n][l] += w * w;
    }
    Ok(())
}

/// Single-worker run with default thresholds.
pub fn run_flatperm(g: GroupId, max_len: usize, tours: u64, rng_seed: u64) -> Result<HistogramEstimate> {
    let mut run = FlatPermRun::new(g, FlatPermConfig::new(max_len, tours, rng_seed))?;
    run.run()?;
    Ok(run.merged())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapePoint {
    pub n: usize,
    pub mean: f64,
    pub std_error: f64,
}

/// Four lengths per doubling, `1, 2, 3, 4, 5, 6, 7, 8, 10, 11, 13, 16, …`,
/// ending at `max_len`.
pub fn sample_lengths(max_len: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    let mut k = 0;
    loop {
        let n = 2f64.powf(k as f64 / 4.0).round() as usize;
        if n >= max_len {
            break;
        }
        if out.last() != Some(&n) {
            out.push(n);
        }
        k += 1;
    }
    if max_len > 0 {
        out.push(max_len);
    }
    out
}

/// Mean geodesic length of `num_words` independent uniform random words,
/// measured at [`sample_lengths`].
pub fn run_simple_sampling(g: GroupId, num_words: usize, max_len: usize, rng_seed: u64) -> Result<Vec<EscapePoint>> {
    run_simple_sampling_at(g, num_words, &sample_lengths(max_len), rng_seed, 1)
}

/// As [`run_simple_sampling`] at the given increasing lengths. Word `i`
/// uses random stream `i`, so the result does not depend on `workers`.
pub fn run_simple_sampling_at(
    g: GroupId,
    num_words: usize,
    lengths: &[usize],
    rng_seed: u64,
    workers: usize,
) -> Result<Vec<EscapePoint>> {
    if !has_metric(g) {
        return Err(Error::MetricUnavailable(format!("no geodesic algorithm for {g}")));
    }
    if num_words < 2 || workers == 0 || lengths.is_empty() || lengths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "need two or more words, a worker and strictly increasing lengths".into(),
        ));
    }
    let size = g.alphabet_size();
    let one_word = |i: usize| -> Result<Vec<f64>> {
        let mut rng = rng_stream(rng_seed, i as u64);
        let mut x = g.identity();
        let mut n = 0;
        let mut out = Vec::with_capacity(lengths.len());
        for &target in lengths {
            while n < target {
                x.apply(random_symbol(size, &mut rng));
                n += 1;
            }
            out.push(geodesic_length(&x)? as f64);
        }
        Ok(out)
    };
    let per_worker: Vec<Result<Vec<Vec<f64>>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| scope.spawn(move || (w..num_words).step_by(workers).map(one_word).collect()))
            .collect();
        handles.into_iter().map(|j| j.join().expect("worker panicked")).collect()
    });
    let mut sums = vec![(0.0f64, 0.0f64); lengths.len()];
    for rows in per_worker {
        for row in rows? {
            for (s, l) in sums.iter_mut().zip(row) {
                s.0 += l;
                s.1 += l * l;
            }
        }
    }
    let m = num_words as f64;
    Ok(lengths
        .iter()
        .zip(sums)
        .map(|(&n, (s, sq))| {
            let mean = s / m;
            let var = ((sq - m * mean * mean) / (m - 1.0)).max(0.0);
            EscapePoint {
                n,
                mean,
                std_error: (var / m).sqrt(),
            }
        })
        .collect())
}

pub fn escape_csv(points: &[EscapePoint]) -> String {
    let mut out = String::from("n,mean_length,std_error\n");
    for p in points {
        writeln!(out, "{},{},{}", p.n, p.mean, p.std_error).unwrap();
    }
    out
}
