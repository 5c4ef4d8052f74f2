//! Exact event-driven simulation of q-TASEP from step initial condition.
//!
//! Particle `k` (1-based) jumps right at rate `a_k (1 - q^{gap_k})` where
//! `gap_k = x_{k-1} - x_k - 1` and `x_0 = +infinity` (particle 1 is a free
//! Poisson particle). Since the rate of particle `k` depends only on the
//! particle ahead, simulating exactly the first `N` particles is exact for
//! `X_N`.
//!
//! Two drivers are provided:
//!
//! - The default Gillespie direct method (exponential holding time from the
//!   total rate, proportional selection through a Fenwick tree, O(log M)
//!   per event), driven by one [`rand_chacha::ChaCha8Rng`] stream per run.
//! - A per-particle-clock coupling ([`run_coupled`]) in which the decision
//!   randomness of particle `k` is a counter-based function of
//!   `(master_seed, k, event count of k)`. Under this construction the
//!   trajectory of the first `N` particles is independent of the system
//!   size `M >= N` by construction; it exists to test truncation exactness
//!   and is not the default sampling path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hydro::{self, RateProfile, ScalingPlan};
use crate::qfun::QParams;

/// Default cap on events per trajectory.
pub const DEFAULT_EVENT_BUDGET: u64 = 1_000_000_000;

const GAP_INFINITE: i64 = i64::MAX;

/// Reproducible family of independent RNG streams: the same `(master_seed,
/// index)` always yields the same stream, distinct indices are independent.
#[derive(Debug, Clone, Copy)]
pub struct RngStream {
    master_seed: u64,
}

impl RngStream {
    pub fn new(master_seed: u64) -> Self {
        RngStream { master_seed }
    }

    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(index);
        rng
    }
}

/// Fenwick (binary indexed) tree over per-particle jump rates.
#[derive(Debug, Clone)]
struct FenwickTree {
    tree: Vec<f64>, // 1-based
    n: usize,
    mask: usize, // highest power of two <= n
    total: f64,
}

impl FenwickTree {
    fn new(values: &[f64]) -> Self {
        let n = values.len();
        let mut tree = vec![0.0; n + 1];
        tree[1..=n].copy_from_slice(values);
        for i in 1..=n {
            let j = i + (i & i.wrapping_neg());
            if j <= n {
                tree[j] += tree[i];
            }
        }
        let mut mask = 1usize;
        while mask * 2 <= n {
            mask *= 2;
        }
        let total = values.iter().sum();
        FenwickTree {
            tree,
            n,
            mask,
            total,
        }
    }

    #[inline]
    fn add(&mut self, index0: usize, delta: f64) {
        let mut i = index0 + 1;
        while i <= self.n {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
        self.total += delta;
    }

    #[inline]
    fn total(&self) -> f64 {
        self.total
    }

    /// Count of leading slots whose cumulative sum is <= `target`; for
    /// `target` uniform on `[0, total)` this selects slot `k` with
    /// probability `rate_k / total`.
    #[inline]
    fn select(&self, mut target: f64) -> usize {
        let mut idx = 0usize;
        let mut bit = self.mask;
        while bit != 0 {
            let next = idx + bit;
            if next <= self.n {
                let v = self.tree[next];
                if target >= v {
                    target -= v;
                    idx = next;
                }
            }
            bit >>= 1;
        }
        idx.min(self.n - 1)
    }

    fn rebuild(&mut self, values: &[f64]) {
        *self = FenwickTree::new(values);
    }
}

/// Cached powers of `q`; beyond the cutoff `q^g < 1e-20` the power is
/// treated as exactly 0 (and `q^infinity = 0` for the sentinel gap).
#[derive(Debug, Clone)]
struct QPowTable {
    pow: Vec<f64>,
}

impl QPowTable {
    fn new(q: f64) -> Self {
        let mut pow = vec![1.0];
        let mut p = 1.0;
        while p > 1e-20 && pow.len() < 65_536 {
            p *= q;
            pow.push(p);
        }
        QPowTable { pow }
    }

    #[inline]
    fn get(&self, gap: i64) -> f64 {
        if gap == GAP_INFINITE || gap as usize >= self.pow.len() {
            0.0
        } else {
            self.pow[gap as usize]
        }
    }
}

/// One committed jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpRecord {
    /// 1-based particle index.
    pub particle: usize,
    /// Simulation clock after the jump.
    pub time: f64,
}

/// Mutable simulation state: strictly decreasing positions, gaps ahead of
/// each particle, per-particle rates, and the selection tree.
#[derive(Debug, Clone)]
pub struct SystemState {
    q: QParams,
    positions: Vec<i64>,
    gaps: Vec<i64>, // gaps[0] is the GAP_INFINITE sentinel
    rates: Vec<f64>,
    a: Vec<f64>,
    tree: FenwickTree,
    qpow: QPowTable,
    clock: f64,
    events: u64,
    event_budget: u64,
}

const REBUILD_PERIOD: u64 = 1 << 20;
const EXCLUSION_SCAN_PERIOD: u64 = 1 << 16;

/// Step initial condition `x_k = -k` for `k = 1..=m`.
pub fn new_system(m: usize, profile: &RateProfile, q: QParams) -> Result<SystemState> {
    if m == 0 {
        return Err(Error::domain("need at least one particle"));
    }
    if profile.max_index() > m {
        return Err(Error::Profile(format!(
            "perturbed index {} exceeds system size {m}",
            profile.max_index()
        )));
    }
    let positions: Vec<i64> = (1..=m as i64).map(|k| -k).collect();
    let mut gaps = vec![0i64; m];
    gaps[0] = GAP_INFINITE;
    let a: Vec<f64> = (1..=m).map(|k| profile.rate(k)).collect();
    let qpow = QPowTable::new(q.q());
    let rates: Vec<f64> = (0..m).map(|k| a[k] * (1.0 - qpow.get(gaps[k]))).collect();
    let tree = FenwickTree::new(&rates);
    Ok(SystemState {
        q,
        positions,
        gaps,
        rates,
        a,
        tree,
        qpow,
        clock: 0.0,
        events: 0,
        event_budget: DEFAULT_EVENT_BUDGET,
    })
}

impl SystemState {
    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    /// Position of particle `k` (1-based).
    pub fn position(&self, k: usize) -> i64 {
        self.positions[k - 1]
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn set_event_budget(&mut self, budget: u64) {
        self.event_budget = budget;
    }

    pub fn total_rate(&self) -> f64 {
        self.tree.total()
    }

    pub fn q(&self) -> QParams {
        self.q
    }

    /// Strict exclusion: positions strictly decreasing.
    pub fn exclusion_holds(&self) -> bool {
        self.positions.windows(2).all(|w| w[0] > w[1])
    }

    /// Every event moves one particle one step right, so
    /// `sum_k (x_k + k) = events`.
    pub fn event_accounting_holds(&self) -> bool {
        let displaced: i64 = self
            .positions
            .iter()
            .enumerate()
            .map(|(i, &x)| x + (i as i64 + 1))
            .sum();
        displaced == self.events as i64
    }

    /// Maximum discrepancy between the incrementally maintained rates (and
    /// tree total) and a full recomputation from the gaps.
    pub fn audit_rates(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..self.len() {
            let fresh = self.a[k] * (1.0 - self.qpow.get(self.gaps[k]));
            worst = worst.max((fresh - self.rates[k]).abs());
        }
        worst.max((self.tree.total() - self.rates.iter().sum::<f64>()).abs())
    }

    #[inline]
    fn draw_event(&mut self, rng: &mut impl Rng) -> Result<(f64, usize)> {
        let total = self.tree.total();
        if !(total > 0.0) {
            return Err(Error::Deadlock);
        }
        let u1: f64 = rng.gen();
        let dt = -(-u1).ln_1p() / total;
        let u2: f64 = rng.gen();
        let mut k = self.tree.select(u2 * total);
        // Floating-point edge: never land on a blocked particle.
        while self.rates[k] <= 0.0 {
            k = (k + 1) % self.len();
        }
        Ok((dt, k))
    }

    #[inline]
    fn set_rate(&mut self, k: usize, rate: f64) {
        let delta = rate - self.rates[k];
        if delta != 0.0 {
            self.rates[k] = rate;
            self.tree.add(k, delta);
        }
    }

    fn commit(&mut self, dt: f64, k: usize) {
        self.clock += dt;
        self.positions[k] += 1;
        debug_assert!(k == 0 || self.positions[k] < self.positions[k - 1]);
        if k > 0 {
            self.gaps[k] -= 1;
            debug_assert!(self.gaps[k] >= 0);
        }
        let rk = self.a[k] * (1.0 - self.qpow.get(self.gaps[k]));
        self.set_rate(k, rk);
        if k + 1 < self.len() {
            self.gaps[k + 1] += 1;
            let rn = self.a[k + 1] * (1.0 - self.qpow.get(self.gaps[k + 1]));
            self.set_rate(k + 1, rn);
        }
        self.events += 1;
        if self.events.is_multiple_of(REBUILD_PERIOD) {
            debug_assert!(self.audit_rates() <= 1e-9 * self.tree.total().max(1.0));
            self.tree.rebuild(&self.rates);
        }
        if self.events.is_multiple_of(EXCLUSION_SCAN_PERIOD) {
            assert!(self.exclusion_holds(), "exclusion violated");
        }
    }

    /// Advance by exactly one jump.
    pub fn step(&mut self, rng: &mut impl Rng) -> Result<JumpRecord> {
        let (dt, k) = self.draw_event(rng)?;
        self.commit(dt, k);
        if self.events > self.event_budget {
            return Err(Error::Budget(self.events));
        }
        Ok(JumpRecord {
            particle: k + 1,
            time: self.clock,
        })
    }

    /// Run until the clock reaches `tau`: the state is the one at the last
    /// event time `<= tau`, with the clock then set to `tau`.
    pub fn run_until(&mut self, tau: f64, rng: &mut impl Rng) -> Result<()> {
        if tau < self.clock {
            return Err(Error::domain(format!(
                "tau = {tau} is before the current clock {}",
                self.clock
            )));
        }
        loop {
            let (dt, k) = self.draw_event(rng)?;
            if self.clock + dt > tau {
                self.clock = tau;
                return Ok(());
            }
            self.commit(dt, k);
            if self.events > self.event_budget {
                return Err(Error::Budget(self.events));
            }
        }
    }
}

/// One fluctuation sample.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct XiSample {
    pub n: u64,
    pub tau: f64,
    pub x_n: i64,
    pub xi: f64,
}

/// Simulate `M = N` particles to the scaling-plan horizon and rescale:
/// `xi = (X_N(tau) - p) / fluct_scale`.
pub fn xi_sample(
    q: QParams,
    theta: f64,
    c: f64,
    n: u64,
    profile: &RateProfile,
    rng: &mut impl Rng,
) -> Result<XiSample> {
    let plan = hydro::scaling_plan(q, theta, c, n, profile)?;
    xi_sample_with_plan(q, n, profile, &plan, rng)
}

fn xi_sample_with_plan(
    q: QParams,
    n: u64,
    profile: &RateProfile,
    plan: &ScalingPlan,
    rng: &mut impl Rng,
) -> Result<XiSample> {
    let mut state = new_system(n as usize, profile, q)?;
    state.run_until(plan.tau, rng)?;
    let x_n = state.position(n as usize);
    Ok(XiSample {
        n,
        tau: plan.tau,
        x_n,
        xi: plan.xi_of_position(x_n as f64),
    })
}

/// Monte-Carlo configuration. Run `j` of any `N` uses RNG stream `j`, so
/// the sample table depends only on the config and master seed, never on
/// thread count or scheduling.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub q: QParams,
    pub theta: f64,
    pub c: f64,
    pub n_list: Vec<u64>,
    pub runs: u64,
    pub profile: RateProfile,
    pub master_seed: u64,
    /// 0 = rayon default.
    pub threads: usize,
}

/// One row of the sample table.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SampleRow {
    pub n: u64,
    pub run: u64,
    pub seed_index: u64,
    pub tau: f64,
    pub x_n: i64,
    pub xi: f64,
}

/// Sample table, sorted by `(N, run)`.
#[derive(Debug, Clone, Default)]
pub struct SampleTable {
    pub rows: Vec<SampleRow>,
}

impl SampleTable {
    /// CSV with doubles printed to 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,run,seed_index,tau,X_N,xi\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.16e},{},{:.16e}\n",
                r.n, r.run, r.seed_index, r.tau, r.x_n, r.xi
            ));
        }
        out
    }

    /// The `xi` values for one `N`, in run order.
    pub fn xi_for(&self, n: u64) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.n == n)
            .map(|r| r.xi)
            .collect()
    }
}

/// One `(N, profile, plan)` group of a Monte-Carlo run. The profile is per
/// group so rate perturbations may depend on `N`.
#[derive(Debug, Clone)]
pub struct MonteCarloJob {
    pub n: u64,
    pub profile: RateProfile,
    pub plan: ScalingPlan,
}

/// Run `runs x |n_list|` trajectories in parallel; output is sorted by
/// `(N, run)` and bit-reproducible for a fixed `(config, master_seed)`.
pub fn monte_carlo(config: &MonteCarloConfig) -> Result<SampleTable> {
    let mut jobs = Vec::new();
    for &n in &config.n_list {
        jobs.push(MonteCarloJob {
            n,
            profile: config.profile.clone(),
            plan: hydro::scaling_plan(config.q, config.theta, config.c, n, &config.profile)?,
        });
    }
    monte_carlo_jobs(
        config.q,
        &jobs,
        config.runs,
        config.master_seed,
        config.threads,
    )
}

/// Worker pool behind [`monte_carlo`]; run `j` of every job group uses RNG
/// stream `j`.
pub fn monte_carlo_jobs(
    q: QParams,
    jobs: &[MonteCarloJob],
    runs: u64,
    master_seed: u64,
    threads: usize,
) -> Result<SampleTable> {
    if runs == 0 {
        return Err(Error::Config("runs must be >= 1".into()));
    }
    let streams = RngStream::new(master_seed);
    let tasks: Vec<(&MonteCarloJob, u64)> = jobs
        .iter()
        .flat_map(|job| (0..runs).map(move |j| (job, j)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    use rayon::prelude::*;
    let rows: Result<Vec<SampleRow>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(job, j)| {
                let mut rng = streams.stream(j);
                let s = xi_sample_with_plan(q, job.n, &job.profile, &job.plan, &mut rng)?;
                Ok(SampleRow {
                    n: job.n,
                    run: j,
                    seed_index: j,
                    tau: s.tau,
                    x_n: s.x_n,
                    xi: s.xi,
                })
            })
            .collect()
    });
    let mut rows = rows?;
    rows.sort_by_key(|r| (r.n, r.run));
    Ok(SampleTable { rows })
}

// ---------------------------------------------------------------------------
// Per-particle-clock coupling (truncation-exactness test path).
// ---------------------------------------------------------------------------

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based Exp(1) draw keyed by `(seed, particle, count)`.
fn keyed_exp(seed: u64, particle: u64, count: u64) -> f64 {
    let h = splitmix(seed ^ splitmix(particle.wrapping_mul(0xD1B5_4A32_D192_ED03)) ^ count);
    let u = (h >> 11) as f64 / (1u64 << 53) as f64; // in [0, 1)
    -(-u).ln_1p()
}

/// Outcome of a coupled run: terminal positions and the jump times of one
/// tracked particle.
#[derive(Debug, Clone)]
pub struct CoupledOutcome {
    pub positions: Vec<i64>,
    pub events: u64,
    pub tracked_jumps: Vec<f64>,
}

/// Event-driven run in which particle `k` jumps whenever its accumulated
/// integrated rate crosses Exp(1) thresholds drawn from the particle's own
/// counter-based stream (Anderson's modified next-reaction construction).
/// The law of the first `N` particles is then independent of `m >= N`, and
/// trajectories are bit-identical across different `m` for a fixed seed.
///
/// Test path: O(M) per event, not meant for large-scale sampling.
pub fn run_coupled(
    m: usize,
    profile: &RateProfile,
    q: QParams,
    tau: f64,
    master_seed: u64,
    tracked: usize,
    event_budget: u64,
) -> Result<CoupledOutcome> {
    if m == 0 || tracked == 0 || tracked > m {
        return Err(Error::domain("need 1 <= tracked <= m"));
    }
    if profile.max_index() > m {
        return Err(Error::Profile(format!(
            "perturbed index {} exceeds system size {m}",
            profile.max_index()
        )));
    }
    let qpow = QPowTable::new(q.q());
    let mut positions: Vec<i64> = (1..=m as i64).map(|k| -k).collect();
    let mut gaps = vec![0i64; m];
    gaps[0] = GAP_INFINITE;
    let a: Vec<f64> = (1..=m).map(|k| profile.rate(k)).collect();
    let mut rates: Vec<f64> = (0..m).map(|k| a[k] * (1.0 - qpow.get(gaps[k]))).collect();
    let mut counts = vec![0u64; m];
    let mut remaining: Vec<f64> = (0..m)
        .map(|k| keyed_exp(master_seed, k as u64 + 1, 0))
        .collect();
    let mut anchor = vec![0.0f64; m];
    let mut events = 0u64;
    let mut tracked_jumps = Vec::new();

    loop {
        // Next virtual jump time over all particles.
        let mut best = f64::INFINITY;
        let mut who = usize::MAX;
        for k in 0..m {
            if rates[k] > 0.0 {
                let t = anchor[k] + remaining[k] / rates[k];
                if t < best {
                    best = t;
                    who = k;
                }
            }
        }
        if who == usize::MAX {
            return Err(Error::Deadlock);
        }
        if best > tau {
            break;
        }
        let (clock, k) = (best, who);
        // Retire the fired particle's threshold and redraw.
        counts[k] += 1;
        remaining[k] = keyed_exp(master_seed, k as u64 + 1, counts[k]);
        anchor[k] = clock;
        positions[k] += 1;
        if k > 0 {
            gaps[k] -= 1;
        }
        debug_assert!(k == 0 || positions[k] < positions[k - 1]);
        // Rates of k and k+1 change: settle consumed work at the old rate.
        rates[k] = a[k] * (1.0 - qpow.get(gaps[k]));
        if k + 1 < m {
            let j = k + 1;
            remaining[j] = (remaining[j] - rates[j] * (clock - anchor[j])).max(0.0);
            anchor[j] = clock;
            gaps[j] += 1;
            rates[j] = a[j] * (1.0 - qpow.get(gaps[j]));
        }
        if k + 1 == tracked {
            tracked_jumps.push(clock);
        }
        events += 1;
        if events > event_budget {
            return Err(Error::Budget(events));
        }
    }
    Ok(CoupledOutcome {
        positions,
        events,
        tracked_jumps,
    })
}
