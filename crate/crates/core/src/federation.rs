//! The federated optimization loop.
//!
//! The server draws a Latin hypercube design, every client evaluates it
//! and trains a local surrogate, and then each round:
//!
//! 1. a random subset of clients is selected,
//! 2. the server aggregates the most recent uploads into a global model,
//! 3. the acquisition function is minimized with the genetic algorithm,
//! 4. the winning point is broadcast and evaluated by every selected
//!    client that can sample it,
//! 5. selected clients adopt the global model, retrain on their archive,
//!    and upload the result.
//!
//! Each round costs exactly one fitness evaluation. The server side only
//! ever holds model parameters, archive sizes and the points it generated;
//! [`audit_data_locality`] checks this at runtime.

use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;

use crate::acquisition::AcquisitionContext;
use crate::aggregation::client_weights;
use crate::benchmarks::{evaluate, evaluate_noisy, is_feasible, Bounds};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::evolution::minimize;
use crate::exec::Execution;
use crate::sampling::{latin_hypercube, spawn_stream, DesignMatrix, Stream};
use crate::surrogate::{init_surrogate, train_in, Dataset, RbfnParams};

/// One simulated client. Its archive never leaves this struct.
#[derive(Debug, Clone)]
pub struct ClientState {
    id: usize,
    archive: Dataset,
    model: RbfnParams,
    noise: Stream,
}

impl ClientState {
    /// 1-based client index.
    pub fn id(&self) -> usize {
        self.id
    }

    pub fn archive(&self) -> &Dataset {
        &self.archive
    }

    pub fn model(&self) -> &RbfnParams {
        &self.model
    }

    fn upload(&self) -> Upload {
        Upload { client: self.id, model: self.model.clone(), archive_size: self.archive.len() }
    }
}

/// What a client sends to the server: its parameters and how much data
/// backs them.
#[derive(Debug, Clone, PartialEq)]
pub struct Upload {
    pub client: usize,
    pub model: RbfnParams,
    pub archive_size: usize,
}

#[derive(Debug, Clone)]
pub struct ServerState {
    design: DesignMatrix,
    global: Option<RbfnParams>,
    uploads: Vec<Upload>,
    broadcast: Vec<Vec<f64>>,
    fe_count: usize,
}

impl ServerState {
    pub fn design(&self) -> &DesignMatrix {
        &self.design
    }

    pub fn global_model(&self) -> Option<&RbfnParams> {
        self.global.as_ref()
    }

    pub fn uploads(&self) -> &[Upload] {
        &self.uploads
    }

    /// Every point broadcast so far, in round order.
    pub fn broadcast(&self) -> &[Vec<f64>] {
        &self.broadcast
    }

    pub fn fe_count(&self) -> usize {
        self.fe_count
    }

    /// Every number held by the server.
    fn numbers(&self) -> impl Iterator<Item = f64> + '_ {
        self.design
            .as_slice()
            .iter()
            .copied()
            .chain(self.global.iter().flat_map(|g| g.values()))
            .chain(self.uploads.iter().flat_map(|u| u.model.values()))
            .chain(self.broadcast.iter().flatten().copied())
    }
}

/// One line of the convergence trace. Round 0 describes the state right
/// after the initial design (its `x_p` is the best design point).
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub fe: usize,
    pub x_p: Vec<f64>,
    /// Noiseless fitness of `x_p`.
    pub x_p_fitness: f64,
    /// Running minimum of noiseless fitness over every evaluated point.
    pub best_fitness: f64,
    /// Clients selected this round.
    pub participants: Vec<usize>,
    /// Clients whose uploads formed this round's global model.
    pub aggregated: Vec<usize>,
    /// Participants that were able to sample `x_p`.
    pub sampled_by: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub run_id: usize,
    pub seed: u64,
    pub records: Vec<RoundRecord>,
}

impl RunTrace {
    pub fn final_best(&self) -> f64 {
        self.records.last().map_or(f64::INFINITY, |r| r.best_fitness)
    }
}

/// `round(lambda * n)` distinct 1-based client ids, ascending.
pub fn select_participants<R: Rng + ?Sized>(n: usize, lambda: f64, rng: &mut R) -> Result<Vec<usize>> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::invalid(format!("participation ratio {lambda} outside (0, 1]")));
    }
    let count = (lambda * n as f64).round() as usize;
    if count == 0 {
        return Err(Error::invalid(format!("participation {lambda} of {n} clients selects nobody")));
    }
    let mut picked: Vec<usize> = index::sample(rng, n, count).into_iter().map(|i| i + 1).collect();
    picked.sort_unstable();
    Ok(picked)
}

/// Server design, initial archives and surrogates, plus the round-0 record.
pub fn initialize(
    cfg: &ExperimentConfig,
    seed: u64,
    exec: Execution,
) -> Result<(ServerState, Vec<ClientState>, RoundRecord)> {
    cfg.validate()?;
    let bounds = cfg.problem.bounds(cfg.dim);
    let design = latin_hypercube(cfg.initial_samples(), cfg.dim, &bounds, &mut spawn_stream(seed, "server-lhs"))?;

    let clients = exec.map_range(cfg.clients, |i| -> Result<ClientState> {
        let id = i + 1;
        let mut noise = spawn_stream(seed, &format!("client-{id}-noise"));
        let targets =
            design.rows().map(|x| evaluate_noisy(cfg.problem, x, cfg.alpha, &mut noise)).collect::<Result<Vec<_>>>()?;
        let archive = Dataset::new(cfg.dim, design.as_slice().to_vec(), targets)?;
        let initial = init_surrogate(&archive, cfg.nodes, &mut spawn_stream(seed, &format!("client-{id}-kmeans")))?;
        let model = train_in(&initial, &archive, cfg.epochs, cfg.learning_rate, cfg.training_space)?;
        Ok(ClientState { id, archive, model, noise })
    });
    let clients = clients.into_iter().collect::<Result<Vec<_>>>()?;

    let (best_i, best) = design
        .rows()
        .map(|x| evaluate(cfg.problem, x))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .enumerate()
        .fold((0, f64::INFINITY), |a, (i, f)| if f < a.1 { (i, f) } else { a });

    let record = RoundRecord {
        round: 0,
        fe: cfg.initial_samples(),
        x_p: design.row(best_i).to_vec(),
        x_p_fitness: best,
        best_fitness: best,
        participants: Vec::new(),
        aggregated: Vec::new(),
        sampled_by: Vec::new(),
    };
    let server = ServerState {
        design,
        global: None,
        uploads: Vec::new(),
        broadcast: Vec::new(),
        fe_count: cfg.initial_samples(),
    };
    Ok((server, clients, record))
}

/// One federated round. `previous_best` is the running noiseless minimum.
pub fn run_round(
    server: &mut ServerState,
    clients: &mut [ClientState],
    cfg: &ExperimentConfig,
    seed: u64,
    round: usize,
    previous_best: f64,
    exec: Execution,
) -> Result<RoundRecord> {
    let abort = |e: Error| Error::RoundAborted { round, source: Box::new(e) };
    let bounds: Bounds = cfg.problem.bounds(cfg.dim);
    let participants =
        select_participants(cfg.clients, cfg.participation, &mut spawn_stream(seed, &format!("round-{round}-select")))?;

    if server.uploads.is_empty() {
        server.uploads = participants.iter().map(|&k| clients[k - 1].upload()).collect();
    }
    let aggregated: Vec<usize> = server.uploads.iter().map(|u| u.client).collect();
    let sizes: Vec<usize> = server.uploads.iter().map(|u| u.archive_size).collect();
    let locals: Vec<RbfnParams> = server.uploads.iter().map(|u| u.model.clone()).collect();
    let weights = client_weights(&sizes)?;
    let global = cfg.aggregator.aggregate(&locals, &weights)?;
    server.global = Some(global.clone());

    let ctx = AcquisitionContext::new(global.clone(), locals, weights, cfg.mu)?;
    ctx.validate(cfg.acquisition, cfg.dim)?;
    let kind = cfg.acquisition;
    let outcome = minimize(
        |x| ctx.score_unchecked(kind, x),
        &bounds,
        &cfg.ga,
        &mut spawn_stream(seed, &format!("round-{round}-ga")),
        exec,
    )
    .map_err(abort)?;
    let x_p = outcome.best_x;
    server.broadcast.push(x_p.clone());

    let mut selected: Vec<&mut ClientState> =
        clients.iter_mut().filter(|c| participants.binary_search(&c.id).is_ok()).collect();
    let steps = exec.map_mut(&mut selected, |client| -> Result<(Upload, bool)> {
        client.model = global.clone();
        let feasible = is_feasible(client.id, cfg.tau, &x_p, cfg.clients, &bounds, cfg.feasible_dim);
        if feasible {
            let y = evaluate_noisy(cfg.problem, &x_p, cfg.alpha, &mut client.noise)?;
            client.archive.push(&x_p, y)?;
        }
        client.model = train_in(&client.model, &client.archive, cfg.epochs, cfg.learning_rate, cfg.training_space)?;
        Ok((client.upload(), feasible))
    });
    let mut uploads = Vec::with_capacity(steps.len());
    let mut sampled_by = Vec::new();
    for step in steps {
        let (upload, feasible) = step.map_err(abort)?;
        if feasible {
            sampled_by.push(upload.client);
        }
        uploads.push(upload);
    }
    server.uploads = uploads;
    server.fe_count += 1;

    let fitness = evaluate(cfg.problem, &x_p)?;
    Ok(RoundRecord {
        round,
        fe: server.fe_count,
        x_p,
        x_p_fitness: fitness,
        best_fitness: previous_best.min(fitness),
        participants,
        aggregated,
        sampled_by,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalityViolation {
    pub client: usize,
    pub sample: usize,
}

impl std::fmt::Display for LocalityViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "server state holds the fitness of sample {} from client {}", self.sample, self.client)
    }
}

/// Check that no observed fitness value from any client archive appears
/// among the numbers held by the server, so no `(x, y)` archive pair can
/// be reconstructed from server state.
pub fn audit_data_locality(server: &ServerState, clients: &[ClientState]) -> Result<(), LocalityViolation> {
    let held: HashSet<u64> = server.numbers().map(f64::to_bits).collect();
    for client in clients {
        for (i, y) in client.archive.targets().iter().enumerate() {
            if held.contains(&y.to_bits()) {
                return Err(LocalityViolation { client: client.id, sample: i });
            }
        }
    }
    Ok(())
}

/// A full run that can be stepped round by round.
pub struct Simulation {
    cfg: ExperimentConfig,
    seed: u64,
    exec: Execution,
    server: ServerState,
    clients: Vec<ClientState>,
    trace: RunTrace,
}

impl Simulation {
    pub fn new(cfg: &ExperimentConfig, seed: u64, exec: Execution) -> Result<Self> {
        let (server, clients, record) = initialize(cfg, seed, exec)?;
        Ok(Simulation {
            cfg: cfg.clone(),
            seed,
            exec,
            server,
            clients,
            trace: RunTrace { run_id: 0, seed, records: vec![record] },
        })
    }

    pub fn server(&self) -> &ServerState {
        &self.server
    }

    pub fn clients(&self) -> &[ClientState] {
        &self.clients
    }

    pub fn trace(&self) -> &RunTrace {
        &self.trace
    }

    pub fn is_finished(&self) -> bool {
        self.server.fe_count >= self.cfg.budget()
    }

    /// Run the next round, or return `None` once the budget is spent.
    pub fn step(&mut self) -> Result<Option<&RoundRecord>> {
        if self.is_finished() {
            return Ok(None);
        }
        let round = self.trace.records.len();
        let best = self.trace.final_best();
        let record = run_round(&mut self.server, &mut self.clients, &self.cfg, self.seed, round, best, self.exec)?;
        self.trace.records.push(record);
        Ok(self.trace.records.last())
    }

    pub fn run_to_end(mut self) -> Result<RunTrace> {
        while self.step()?.is_some() {}
        Ok(self.trace)
    }
}

/// Initial design plus rounds until `11 d` fitness evaluations are spent.
pub fn run_optimization(cfg: &ExperimentConfig, seed: u64) -> Result<RunTrace> {
    run_optimization_with(cfg, seed, Execution::default())
}

pub fn run_optimization_with(cfg: &ExperimentConfig, seed: u64, exec: Execution) -> Result<RunTrace> {
    Simulation::new(cfg, seed, exec)?.run_to_end()
}
