//! Max-min subspace packing.
//!
//! The search works on a per-pair *similarity* `s ∈ [0, 1]` that decreases
//! with distance: `‖SᵀT‖_F² / k` for the chordal metric and `det(SᵀT)²` for
//! Fubini–Study. Maximizing the minimum distance is minimizing the maximum
//! similarity, which is first smoothed with a log-sum-exp at inverse
//! temperature β (doubled whenever progress stalls), then polished by
//! descending the single most similar pair. Every update is followed by a QR
//! retraction back onto orthonormal bases, and the best iterate seen is kept.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grassmann::{self, Metric, Subspace};

pub const DEFAULT_RESTARTS: usize = 20;
pub const DEFAULT_MAX_ITERS: usize = 2000;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Consecutive rank-deficient draws tolerated before giving up on the generator.
const MAX_DRAWS: usize = 100;

/// Definition of a packing search: N subspaces of G(m, k) under `metric`.
#[derive(Debug, Clone, PartialEq)]
pub struct PackingProblem {
    pub m: usize,
    pub k: usize,
    pub n: usize,
    pub metric: Metric,
    pub restarts: usize,
    pub max_iters: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl PackingProblem {
    /// A problem with default search settings and seed 0.
    pub fn new(m: usize, k: usize, n: usize, metric: Metric) -> Result<Self> {
        let problem = Self {
            m,
            k,
            n,
            metric,
            restarts: DEFAULT_RESTARTS,
            max_iters: DEFAULT_MAX_ITERS,
            tolerance: DEFAULT_TOLERANCE,
            seed: 0,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    /// Checks the problem invariants. A single subspace (N = 1) is accepted
    /// as a degenerate request whose minimum distance is undefined.
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > self.m {
            return Err(Error::InvalidProblem(format!(
                "need 1 <= k <= m, got m={}, k={}",
                self.m, self.k
            )));
        }
        if self.n == 0 {
            return Err(Error::InvalidProblem("need at least one subspace".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidProblem("restarts must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidProblem("max_iters must be positive".into()));
        }
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return Err(Error::InvalidProblem(format!(
                "tolerance must be a positive number, got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

/// Upper bound `√((m−k)·N / (m·(N−1)))` on the minimum chordal distance.
pub fn rankin_bound(m: usize, k: usize, n: usize) -> Result<f64> {
    check_bound_args(m, k, n)?;
    let (m, k, n) = (m as f64, k as f64, n as f64);
    Ok(((m - k) * n / (m * (n - 1.0))).sqrt())
}

/// Rankin simplex bound with the `k` factor of the chordal-distance
/// literature, `√(k(m−k)/m · N/(N−1))`. Coincides with [`rankin_bound`] for k = 1.
pub fn generalized_rankin_bound(m: usize, k: usize, n: usize) -> Result<f64> {
    check_bound_args(m, k, n)?;
    Ok(rankin_bound(m, k, n)? * (k as f64).sqrt())
}

fn check_bound_args(m: usize, k: usize, n: usize) -> Result<()> {
    if k == 0 || k > m {
        return Err(Error::InvalidProblem(format!(
            "need 1 <= k <= m, got m={m}, k={k}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidProblem(format!("need N >= 2, got N={n}")));
    }
    Ok(())
}

/// A set of N subspaces together with the problem that produced it and its
/// achieved minimum distance.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    problem: PackingProblem,
    subspaces: Vec<Subspace>,
    min_distance: Option<f64>,
    rankin_bound: Option<f64>,
    generalized_rankin_bound: Option<f64>,
    iterations_used: usize,
    converged: bool,
}

impl Codebook {
    /// Assembles a codebook, checking shapes and recomputing δ(W) and the bounds.
    pub fn from_parts(
        problem: PackingProblem,
        subspaces: Vec<Subspace>,
        iterations_used: usize,
        converged: bool,
    ) -> Result<Self> {
        problem.validate()?;
        if subspaces.len() != problem.n {
            return Err(Error::DimensionMismatch(format!(
                "problem expects {} subspaces, got {}",
                problem.n,
                subspaces.len()
            )));
        }
        if let Some(bad) = subspaces
            .iter()
            .position(|s| s.ambient_dim() != problem.m || s.dim() != problem.k)
        {
            let s = &subspaces[bad];
            return Err(Error::DimensionMismatch(format!(
                "subspace {bad} is in G({}, {}), problem is G({}, {})",
                s.ambient_dim(),
                s.dim(),
                problem.m,
                problem.k
            )));
        }
        let min_distance = grassmann::min_distance(&subspaces, problem.metric)?;
        let (rankin, generalized) = if problem.n >= 2 {
            (
                Some(rankin_bound(problem.m, problem.k, problem.n)?),
                Some(generalized_rankin_bound(problem.m, problem.k, problem.n)?),
            )
        } else {
            (None, None)
        };
        Ok(Self {
            problem,
            subspaces,
            min_distance,
            rankin_bound: rankin,
            generalized_rankin_bound: generalized,
            iterations_used,
            converged,
        })
    }

    pub fn problem(&self) -> &PackingProblem {
        &self.problem
    }

    pub fn subspaces(&self) -> &[Subspace] {
        &self.subspaces
    }

    pub fn metric(&self) -> Metric {
        self.problem.metric
    }

    pub fn len(&self) -> usize {
        self.subspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subspaces.is_empty()
    }

    /// δ(W), or `None` for a single-subspace codebook.
    pub fn min_distance(&self) -> Option<f64> {
        self.min_distance
    }

    pub fn rankin_bound(&self) -> Option<f64> {
        self.rankin_bound
    }

    pub fn generalized_rankin_bound(&self) -> Option<f64> {
        self.generalized_rankin_bound
    }

    pub fn iterations_used(&self) -> usize {
        self.iterations_used
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn pairwise_distances(&self) -> DMatrix<f64> {
        grassmann::pairwise_distances(&self.subspaces, self.problem.metric)
            .expect("codebook subspaces share their dimensions")
    }

    /// The bound the achieved chordal δ must respect: the printed Rankin
    /// bound for lines, the k-scaled form otherwise.
    pub fn applicable_bound(&self) -> Option<f64> {
        match self.problem.metric {
            Metric::Chordal if self.problem.k == 1 => self.rankin_bound,
            Metric::Chordal => self.generalized_rankin_bound,
            Metric::FubiniStudy => None,
        }
    }
}

fn draw_subspace(rng: &mut ChaCha8Rng, m: usize, k: usize) -> Result<Subspace> {
    for _ in 0..MAX_DRAWS {
        let raw: Vec<f64> = (0..m * k).map(|_| StandardNormal.sample(rng)).collect();
        match Subspace::orthonormalize(&DMatrix::from_column_slice(m, k, &raw)) {
            Ok(s) => return Ok(s),
            Err(Error::RankDeficient { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ImproperRandomState { draws: MAX_DRAWS })
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn random_subspaces(problem: &PackingProblem, restart: usize) -> Result<Vec<Subspace>> {
    let mut rng = restart_rng(problem.seed, restart);
    (0..problem.n)
        .map(|_| draw_subspace(&mut rng, problem.m, problem.k))
        .collect()
}

/// N independent uniformly distributed subspaces from the problem's seed.
/// This is also the starting point of the first restart of [`optimize`].
pub fn random_codebook(problem: &PackingProblem) -> Result<Codebook> {
    problem.validate()?;
    let subspaces = random_subspaces(problem, 0)?;
    Codebook::from_parts(problem.clone(), subspaces, 0, false)
}

/// Searches for a packing maximizing the minimum pairwise distance and
/// returns the best codebook over all restarts (ties go to the lower
/// restart index). Running out of iterations is reported through
/// [`Codebook::converged`], not as an error.
pub fn optimize(problem: &PackingProblem) -> Result<Codebook> {
    problem.validate()?;
    if problem.n < 2 {
        return random_codebook(problem);
    }
    let runs: Vec<Result<Codebook>> = (0..problem.restarts)
        .into_par_iter()
        .map(|restart| {
            let start = random_subspaces(problem, restart)?;
            let outcome = search(problem, &start, problem.max_iters, Schedule::fresh());
            Codebook::from_parts(
                problem.clone(),
                outcome.subspaces,
                outcome.iterations,
                outcome.converged,
            )
        })
        .collect();

    let mut best: Option<Codebook> = None;
    for run in runs {
        let run = run?;
        let better = match &best {
            None => true,
            Some(b) => run.min_distance > b.min_distance,
        };
        if better {
            best = Some(run);
        }
    }
    Ok(best.expect("restarts is positive"))
}

/// Continues the search from an existing codebook for `extra_iters` more
/// iterations. The minimum distance never decreases.
pub fn refine(codebook: &Codebook, extra_iters: usize) -> Result<Codebook> {
    if extra_iters == 0 || codebook.len() < 2 {
        return Ok(codebook.clone());
    }
    let problem = codebook.problem();
    let outcome = search(problem, codebook.subspaces(), extra_iters, Schedule::warm());
    let refined = Codebook::from_parts(
        problem.clone(),
        outcome.subspaces,
        codebook.iterations_used + outcome.iterations,
        outcome.converged,
    )?;
    if refined.min_distance >= codebook.min_distance {
        Ok(refined)
    } else {
        Ok(codebook.clone())
    }
}

/// Tunables of one search run.
#[derive(Debug, Clone, Copy)]
struct Schedule {
    beta_start: f64,
    beta_max: f64,
    /// Initial step is `step_scale / β`.
    step_scale: f64,
    /// Fraction of the budget given to the smoothed stage; the rest polishes.
    smooth_fraction: f64,
}

impl Schedule {
    fn fresh() -> Self {
        Self {
            beta_start: 10.0,
            beta_max: 1e7,
            step_scale: 1.0,
            smooth_fraction: 0.9,
        }
    }

    fn warm() -> Self {
        Self {
            beta_start: 1e3,
            ..Self::fresh()
        }
    }
}

/// Pair similarity whose maximum the search drives down.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Similarity {
    /// `‖SᵀT‖_F² / k`
    Projection,
    /// `det(SᵀT)²`
    Determinant,
}

impl Similarity {
    fn for_metric(metric: Metric) -> Self {
        match metric {
            Metric::Chordal => Similarity::Projection,
            Metric::FubiniStudy => Similarity::Determinant,
        }
    }
}

struct Outcome {
    subspaces: Vec<Subspace>,
    iterations: usize,
    converged: bool,
}

fn search(problem: &PackingProblem, start: &[Subspace], budget: usize, schedule: Schedule) -> Outcome {
    let mut state = Packing::from_subspaces(start, problem.m, problem.k);
    let target = Similarity::for_metric(problem.metric);
    let mut tracker = BestTracker::new(&mut state, target);
    let mut used = 0;

    let smooth_budget = ((budget as f64) * schedule.smooth_fraction).round() as usize;
    let polish_budget = budget - smooth_budget;

    let smooth_done = match target {
        Similarity::Projection => {
            let (iters, done) = smooth_stage(
                &mut state,
                &mut tracker,
                Similarity::Projection,
                smooth_budget,
                schedule,
                problem.tolerance,
            );
            used += iters;
            done
        }
        Similarity::Determinant => {
            // the projection similarity is a well-conditioned surrogate; the
            // determinant one takes over for the final tenth of the budget
            let surrogate_budget = smooth_budget.saturating_sub(budget / 10);
            let (iters, _) = smooth_stage(
                &mut state,
                &mut tracker,
                Similarity::Projection,
                surrogate_budget,
                schedule,
                problem.tolerance,
            );
            used += iters;
            let (iters, done) = smooth_stage(
                &mut state,
                &mut tracker,
                Similarity::Determinant,
                smooth_budget - used,
                Schedule {
                    beta_start: schedule.beta_start * 10.0,
                    ..schedule
                },
                problem.tolerance,
            );
            used += iters;
            done
        }
    };

    let remaining = budget - used.min(budget);
    let polish_budget = if smooth_done { remaining } else { polish_budget.min(remaining) };
    let (iters, stalled) = polish_stage(&mut state, &mut tracker, target, polish_budget);
    used += iters;

    Outcome {
        subspaces: tracker.into_subspaces(problem.m, problem.k),
        iterations: used,
        converged: smooth_done && stalled,
    }
}

/// Log-sum-exp descent with β doubling. Returns the iterations spent and
/// whether β reached its ceiling with progress stalled.
fn smooth_stage(
    state: &mut Packing,
    tracker: &mut BestTracker,
    sim: Similarity,
    budget: usize,
    schedule: Schedule,
    tolerance: f64,
) -> (usize, bool) {
    let mut beta = schedule.beta_start;
    let mut step = schedule.step_scale / beta;
    let min_step = 1e-14;
    let mut trial = state.clone();
    state.evaluate(sim);
    let mut value = state.smoothed(beta);
    let mut iters = 0;

    while iters < budget {
        state.gradient_smoothed(beta);
        state.project_gradient();
        let mut improved = false;
        while iters < budget {
            iters += 1;
            if !trial.step_from(state, step) {
                step *= 0.5;
                continue;
            }
            trial.evaluate(sim);
            let trial_value = trial.smoothed(beta);
            if trial_value <= value {
                tracker.offer(&mut trial);
                let relative = (value - trial_value) / value.abs().max(f64::MIN_POSITIVE);
                std::mem::swap(state, &mut trial);
                value = trial_value;
                step *= 1.2;
                improved = relative >= tolerance;
                break;
            }
            step *= 0.5;
            if step < min_step {
                break;
            }
        }
        if !improved {
            if beta >= schedule.beta_max {
                return (iters, true);
            }
            beta = (beta * 2.0).min(schedule.beta_max);
            step = schedule.step_scale / beta;
            value = state.smoothed(beta);
        }
    }
    (iters, false)
}

/// Descent on the single most similar pair, accepting only steps that lower
/// the maximum similarity. Returns the iterations spent and whether the step
/// size collapsed.
fn polish_stage(state: &mut Packing, tracker: &mut BestTracker, sim: Similarity, budget: usize) -> (usize, bool) {
    let mut trial = state.clone();
    state.evaluate(sim);
    let mut step = 1e-3;
    let mut iters = 0;
    while iters < budget {
        let worst = state.max_similarity();
        state.gradient_single_pair(state.argmax_pair());
        state.project_gradient();
        let mut accepted = false;
        while iters < budget && step > 1e-15 {
            iters += 1;
            if trial.step_from(state, step) {
                trial.evaluate(sim);
                if trial.max_similarity() < worst {
                    tracker.offer(&mut trial);
                    std::mem::swap(state, &mut trial);
                    step *= 1.5;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            return (iters, step <= 1e-15);
        }
    }
    (iters, false)
}

/// Keeps the iterate with the smallest maximum target similarity.
struct BestTracker {
    target: Similarity,
    best_value: f64,
    best: Vec<f64>,
}

impl BestTracker {
    fn new(state: &mut Packing, target: Similarity) -> Self {
        state.evaluate(target);
        Self {
            target,
            best_value: state.max_similarity(),
            best: state.bases.clone(),
        }
    }

    /// `state` must already be evaluated for some similarity; it is
    /// re-evaluated for the target if needed.
    fn offer(&mut self, state: &mut Packing) {
        let value = if state.evaluated == Some(self.target) {
            state.max_similarity()
        } else {
            state.max_similarity_for(self.target)
        };
        if value < self.best_value {
            self.best_value = value;
            self.best.copy_from_slice(&state.bases);
        }
    }

    fn into_subspaces(self, m: usize, k: usize) -> Vec<Subspace> {
        self.best
            .chunks_exact(m * k)
            .map(|chunk| {
                let basis = DMatrix::from_column_slice(m, k, chunk);
                // the retraction keeps bases orthonormal to rounding; one more
                // QR pass pins the deviation well below the 1e-10 contract
                Subspace::from_basis_unchecked(grassmann::qr_positive(basis))
            })
            .collect()
    }
}

/// Flat, allocation-free working state of a packing search.
#[derive(Clone)]
struct Packing {
    m: usize,
    k: usize,
    n: usize,
    /// N bases of m×k, column-major, back to back.
    bases: Vec<f64>,
    /// Euclidean then Riemannian gradient, same layout as `bases`.
    grad: Vec<f64>,
    /// `S_iᵀ S_j` for every pair i < j, k×k column-major.
    cross: Vec<f64>,
    sims: Vec<f64>,
    pairs: Vec<(usize, usize)>,
    evaluated: Option<Similarity>,
    weights: Vec<f64>,
    scratch: Vec<f64>,
}

impl Packing {
    fn from_subspaces(subspaces: &[Subspace], m: usize, k: usize) -> Self {
        let n = subspaces.len();
        let mut bases = Vec::with_capacity(n * m * k);
        for s in subspaces {
            bases.extend_from_slice(s.as_slice());
        }
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        Self {
            m,
            k,
            n,
            grad: vec![0.0; bases.len()],
            bases,
            cross: vec![0.0; pairs.len() * k * k],
            sims: vec![0.0; pairs.len()],
            weights: vec![0.0; pairs.len()],
            pairs,
            evaluated: None,
            scratch: vec![0.0; 2 * k * k + m * k],
        }
    }

    /// Fills `cross` and `sims`.
    fn evaluate(&mut self, sim: Similarity) {
        let (m, k) = (self.m, self.k);
        let kk = k * k;
        let len = m * k;
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            let si = &self.bases[i * len..(i + 1) * len];
            let sj = &self.bases[j * len..(j + 1) * len];
            let cross = &mut self.cross[p * kk..(p + 1) * kk];
            for b in 0..k {
                let col_j = &sj[b * m..(b + 1) * m];
                for a in 0..k {
                    let col_i = &si[a * m..(a + 1) * m];
                    cross[b * k + a] = dot(col_i, col_j);
                }
            }
            self.sims[p] = match sim {
                Similarity::Projection => {
                    cross.iter().map(|x| x * x).sum::<f64>() / k as f64
                }
                Similarity::Determinant => {
                    let d = determinant(cross, k);
                    d * d
                }
            };
        }
        self.evaluated = Some(sim);
    }

    fn max_similarity(&self) -> f64 {
        self.sims.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn argmax_pair(&self) -> usize {
        let mut best = 0;
        for (p, &s) in self.sims.iter().enumerate() {
            if s > self.sims[best] {
                best = p;
            }
        }
        best
    }

    fn max_similarity_for(&self, sim: Similarity) -> f64 {
        let k = self.k;
        let kk = k * k;
        (0..self.pairs.len())
            .map(|p| {
                let cross = &self.cross[p * kk..(p + 1) * kk];
                match sim {
                    Similarity::Projection => {
                        cross.iter().map(|x| x * x).sum::<f64>() / k as f64
                    }
                    Similarity::Determinant => determinant(cross, k).powi(2),
                }
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(1/β)·log Σ exp(β·s_p)`, computed around the maximum.
    fn smoothed(&self, beta: f64) -> f64 {
        let top = self.max_similarity();
        let sum: f64 = self.sims.iter().map(|s| (beta * (s - top)).exp()).sum();
        top + sum.ln() / beta
    }

    fn gradient_smoothed(&mut self, beta: f64) {
        let top = self.max_similarity();
        let mut total = 0.0;
        for (w, s) in self.weights.iter_mut().zip(&self.sims) {
            *w = (beta * (s - top)).exp();
            total += *w;
        }
        for w in &mut self.weights {
            *w /= total;
        }
        self.grad.iter_mut().for_each(|g| *g = 0.0);
        for p in 0..self.pairs.len() {
            let w = self.weights[p];
            // pairs far below the maximum contribute nothing measurable
            if w > 1e-300 {
                self.accumulate_pair(p, w);
            }
        }
    }

    fn gradient_single_pair(&mut self, p: usize) {
        self.grad.iter_mut().for_each(|g| *g = 0.0);
        self.accumulate_pair(p, 1.0);
    }

    /// Adds `weight · ∂s_p/∂S_i` and `weight · ∂s_p/∂S_j` to the gradient.
    fn accumulate_pair(&mut self, p: usize, weight: f64) {
        let (m, k) = (self.m, self.k);
        let kk = k * k;
        let len = m * k;
        let (i, j) = self.pairs[p];
        let sim = self.evaluated.expect("evaluate before differentiating");

        // G = ∂s/∂M, M = S_iᵀ S_j
        let (dsdm, rest) = self.scratch.split_at_mut(kk);
        let cross = &self.cross[p * kk..(p + 1) * kk];
        match sim {
            Similarity::Projection => {
                let scale = 2.0 / k as f64;
                for (g, c) in dsdm.iter_mut().zip(cross) {
                    *g = scale * c;
                }
            }
            Similarity::Determinant => {
                let (cof, _) = rest.split_at_mut(kk);
                let det = cofactor(cross, k, cof);
                for (g, c) in dsdm.iter_mut().zip(cof.iter()) {
                    *g = 2.0 * det * c;
                }
            }
        }

        // ∂s/∂S_i = S_j Gᵀ, ∂s/∂S_j = S_i G
        for a in 0..k {
            for b in 0..k {
                let g = weight * dsdm[b * k + a];
                if g == 0.0 {
                    continue;
                }
                for r in 0..m {
                    let sj = self.bases[j * len + b * m + r];
                    let si = self.bases[i * len + a * m + r];
                    self.grad[i * len + a * m + r] += g * sj;
                    self.grad[j * len + b * m + r] += g * si;
                }
            }
        }
    }

    /// Replaces each gradient block by its component orthogonal to the basis,
    /// `(I − S Sᵀ) G`.
    fn project_gradient(&mut self) {
        let (m, k) = (self.m, self.k);
        let len = m * k;
        for i in 0..self.n {
            let s = &self.bases[i * len..(i + 1) * len];
            let g = &mut self.grad[i * len..(i + 1) * len];
            // coeff[a, b] = s_aᵀ g_b
            let coeff = &mut self.scratch[..k * k];
            for b in 0..k {
                for a in 0..k {
                    coeff[b * k + a] = dot(&s[a * m..(a + 1) * m], &g[b * m..(b + 1) * m]);
                }
            }
            for b in 0..k {
                for a in 0..k {
                    let c = coeff[b * k + a];
                    for r in 0..m {
                        g[b * m + r] -= c * s[a * m + r];
                    }
                }
            }
        }
    }

    /// `self ← retract(origin − step · grad(origin))`. Returns false if a
    /// retraction failed (a column collapsed).
    fn step_from(&mut self, origin: &Packing, step: f64) -> bool {
        let (m, k) = (self.m, self.k);
        let len = m * k;
        for ((dst, src), g) in self.bases.iter_mut().zip(&origin.bases).zip(&origin.grad) {
            *dst = src - step * g;
        }
        self.evaluated = None;
        for i in 0..self.n {
            if !gram_schmidt_in_place(&mut self.bases[i * len..(i + 1) * len], m, k) {
                return false;
            }
        }
        true
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Modified Gram–Schmidt with one reorthogonalization pass; equivalent to the
/// thin QR factor with a positive diagonal.
fn gram_schmidt_in_place(basis: &mut [f64], m: usize, k: usize) -> bool {
    for j in 0..k {
        for _pass in 0..2 {
            for i in 0..j {
                let (done, rest) = basis.split_at_mut(j * m);
                let qi = &done[i * m..(i + 1) * m];
                let v = &mut rest[..m];
                let c = dot(qi, v);
                for r in 0..m {
                    v[r] -= c * qi[r];
                }
            }
        }
        let v = &mut basis[j * m..(j + 1) * m];
        let norm = dot(v, v).sqrt();
        if !(norm > 1e-12) {
            return false;
        }
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    true
}

/// Determinant of a k×k column-major matrix.
fn determinant(a: &[f64], k: usize) -> f64 {
    match k {
        1 => a[0],
        2 => a[0] * a[3] - a[2] * a[1],
        3 => {
            a[0] * (a[4] * a[8] - a[7] * a[5]) - a[3] * (a[1] * a[8] - a[7] * a[2])
                + a[6] * (a[1] * a[5] - a[4] * a[2])
        }
        _ => DMatrix::from_column_slice(k, k, a).determinant(),
    }
}

/// Writes the cofactor matrix `∂det/∂A` into `out` and returns `det(A)`.
fn cofactor(a: &[f64], k: usize, out: &mut [f64]) -> f64 {
    match k {
        1 => {
            out[0] = 1.0;
            a[0]
        }
        2 => {
            out[0] = a[3];
            out[1] = -a[2];
            out[2] = -a[1];
            out[3] = a[0];
            a[0] * a[3] - a[2] * a[1]
        }
        3 => {
            // column c of the cofactor matrix is the cross product of the other two columns
            let col = |c: usize| [a[3 * c], a[3 * c + 1], a[3 * c + 2]];
            let cross = |u: [f64; 3], v: [f64; 3]| {
                [
                    u[1] * v[2] - u[2] * v[1],
                    u[2] * v[0] - u[0] * v[2],
                    u[0] * v[1] - u[1] * v[0],
                ]
            };
            let c0 = cross(col(1), col(2));
            let c1 = cross(col(2), col(0));
            let c2 = cross(col(0), col(1));
            out[..3].copy_from_slice(&c0);
            out[3..6].copy_from_slice(&c1);
            out[6..9].copy_from_slice(&c2);
            c0[0] * a[0] + c0[1] * a[1] + c0[2] * a[2]
        }
        _ => {
            // A = U Σ Vᵀ ⇒ cof(A) = det(U)det(V)·U diag(Π_{j≠i} σ_j) Vᵀ
            let mat = DMatrix::from_column_slice(k, k, a);
            let svd = mat.svd(true, true);
            let u = svd.u.expect("requested U");
            let v_t = svd.v_t.expect("requested Vᵀ");
            let sigma = &svd.singular_values;
            let sign = u.determinant().signum() * v_t.determinant().signum();
            let mut scaled = u.clone();
            for c in 0..k {
                let others: f64 = (0..k).filter(|&j| j != c).map(|j| sigma[j]).product();
                scaled.column_mut(c).scale_mut(others);
            }
            let cof = (scaled * v_t) * sign;
            out[..k * k].copy_from_slice(cof.as_slice());
            sign * sigma.iter().product::<f64>()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_matrix(k: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..k * k).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn rankin_values() {
        assert!((rankin_bound(2, 1, 3).unwrap() - 0.75f64.sqrt()).abs() < 1e-15);
        assert!((rankin_bound(2, 1, 3).unwrap() - 0.86603).abs() < 1e-5);
        assert!((rankin_bound(3, 1, 4).unwrap() - (8.0f64 / 9.0).sqrt()).abs() < 1e-15);
        assert!((rankin_bound(3, 1, 4).unwrap() - 0.94281).abs() < 1e-5);
        assert_eq!(rankin_bound(4, 4, 7).unwrap(), 0.0);
        assert_eq!(
            rankin_bound(3, 1, 6).unwrap(),
            generalized_rankin_bound(3, 1, 6).unwrap()
        );
        assert!(matches!(rankin_bound(2, 3, 4), Err(Error::InvalidProblem(_))));
        assert!(matches!(rankin_bound(4, 2, 1), Err(Error::InvalidProblem(_))));
    }

    #[test]
    fn generalized_bound_scales_with_sqrt_k() {
        let g = generalized_rankin_bound(9, 3, 32).unwrap();
        let expected = (3.0 * 6.0 / 9.0 * 32.0 / 31.0f64).sqrt();
        assert!((g - expected).abs() < 1e-14);
    }

    #[test]
    fn cofactor_matches_finite_differences() {
        for k in 1..=5 {
            let a = random_matrix(k, 40 + k as u64);
            let mut cof = vec![0.0; k * k];
            let det = cofactor(&a, k, &mut cof);
            let reference = DMatrix::from_column_slice(k, k, &a).determinant();
            assert!((det - reference).abs() < 1e-12, "k={k}");
            assert!((determinant(&a, k) - reference).abs() < 1e-12, "k={k}");
            let h = 1e-6;
            for idx in 0..k * k {
                let mut plus = a.clone();
                let mut minus = a.clone();
                plus[idx] += h;
                minus[idx] -= h;
                let fd = (determinant(&plus, k) - determinant(&minus, k)) / (2.0 * h);
                assert!((fd - cof[idx]).abs() < 1e-7, "k={k} idx={idx}: {fd} vs {}", cof[idx]);
            }
        }
    }

    #[test]
    fn smoothed_gradient_matches_finite_differences() {
        for metric in Metric::ALL {
            let problem = PackingProblem::new(5, 2, 4, metric).unwrap().with_seed(3);
            let start = random_subspaces(&problem, 0).unwrap();
            let sim = Similarity::for_metric(metric);
            let beta = 7.0;
            let mut state = Packing::from_subspaces(&start, 5, 2);
            state.evaluate(sim);
            state.gradient_smoothed(beta);
            let h = 1e-6;
            for idx in [0, 3, 11, 17, 25, 39] {
                let mut plus = state.clone();
                plus.bases[idx] += h;
                plus.evaluate(sim);
                let mut minus = state.clone();
                minus.bases[idx] -= h;
                minus.evaluate(sim);
                let fd = (plus.smoothed(beta) - minus.smoothed(beta)) / (2.0 * h);
                assert!(
                    (fd - state.grad[idx]).abs() < 1e-6,
                    "{metric} idx={idx}: {fd} vs {}",
                    state.grad[idx]
                );
            }
        }
    }

    #[test]
    fn retraction_keeps_orthonormality() {
        let mut basis = random_matrix(3, 9);
        basis.extend(random_matrix(3, 10));
        // 6×3 from 18 entries
        let m = 6;
        assert!(gram_schmidt_in_place(&mut basis, m, 3));
        let mat = DMatrix::from_column_slice(m, 3, &basis);
        assert!(grassmann::orthonormality_deviation(&mat) < 1e-15);
        let mut collapsed = vec![1.0, 0.0, 2.0, 0.0];
        assert!(!gram_schmidt_in_place(&mut collapsed, 2, 2));
    }

    #[test]
    fn invalid_problems() {
        assert!(PackingProblem::new(2, 3, 4, Metric::Chordal).is_err());
        assert!(PackingProblem::new(3, 1, 0, Metric::Chordal).is_err());
        let p = PackingProblem::new(3, 1, 4, Metric::Chordal).unwrap();
        assert!(p.clone().with_tolerance(0.0).validate().is_err());
        assert!(p.clone().with_restarts(0).validate().is_err());
        assert!(p.with_max_iters(0).validate().is_err());
    }

    #[test]
    fn single_subspace_has_undefined_distance() {
        let p = PackingProblem::new(4, 2, 1, Metric::FubiniStudy).unwrap();
        let c = optimize(&p).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.min_distance(), None);
        assert_eq!(c.rankin_bound(), None);
        assert!(c.subspaces()[0].orthonormality_error() < 1e-12);
    }
}
