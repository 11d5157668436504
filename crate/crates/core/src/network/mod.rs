//! Stacked recurrent models.
//!
//! A [`StackedModel`] is `layers` cells of one kind. At every timestep layer
//! `k`'s new hidden state is layer `k+1`'s input; the prediction is a linear
//! read-out of the top layer's hidden state after the last step.
//!
//! State handling follows [`StateMode`]:
//!
//! - `Stateless`: every window starts from zero states.
//! - `Stateful`: a window starts from the states the previous window ended
//!   with, and leaves its own final states behind. Gradients are truncated at
//!   the window boundary; the incoming state is treated as a constant.

mod checkpoint;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};

use std::fmt;
use std::str::FromStr;

use crate::cells::{
    gru_backward, gru_forward, lstm_backward, lstm_forward, CellState, GruCache, GruParams, LstmCache,
    LstmParams,
};
use crate::error::{Error, Result};
use crate::numerics::{SeededRng, Tensor2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellKind {
    Lstm,
    Gru,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateMode {
    Stateless,
    Stateful,
}

impl CellKind {
    pub const ALL: [CellKind; 2] = [CellKind::Lstm, CellKind::Gru];

    pub fn as_str(self) -> &'static str {
        match self {
            CellKind::Lstm => "lstm",
            CellKind::Gru => "gru",
        }
    }
}

impl StateMode {
    pub const ALL: [StateMode; 2] = [StateMode::Stateless, StateMode::Stateful];

    pub fn as_str(self) -> &'static str {
        match self {
            StateMode::Stateless => "stateless",
            StateMode::Stateful => "stateful",
        }
    }
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for StateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lstm" => Ok(CellKind::Lstm),
            "gru" => Ok(CellKind::Gru),
            _ => Err(Error::Config(format!("unknown cell kind {s:?}; allowed values: lstm, gru"))),
        }
    }
}

impl FromStr for StateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "stateless" => Ok(StateMode::Stateless),
            "stateful" => Ok(StateMode::Stateful),
            _ => Err(Error::Config(format!(
                "unknown state mode {s:?}; allowed values: stateless, stateful"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub cell: CellKind,
    pub mode: StateMode,
    pub layers: usize,
    /// Features per timestep.
    pub input_width: usize,
    /// Hidden units per layer.
    pub hidden_width: usize,
    /// Timesteps per window.
    pub lookback: usize,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            cell: CellKind::Lstm,
            mode: StateMode::Stateless,
            layers: 10,
            input_width: 9,
            hidden_width: 32,
            lookback: 24,
            seed: 42,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, v) in [
            ("layers", self.layers),
            ("input_width", self.input_width),
            ("hidden_width", self.hidden_width),
            ("lookback", self.lookback),
        ] {
            if v == 0 {
                problems.push(format!("{name} must be at least 1"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    /// Short label such as `stateless-lstm`.
    pub fn variant_name(&self) -> String {
        format!("{}-{}", self.mode, self.cell)
    }
}

/// One training/evaluation example.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    /// `lookback × input_width`, one row per hour.
    pub x: Tensor2,
    /// Target for the hour after the last row.
    pub y: f64,
    /// Row of the source dataset holding the target.
    pub target_row: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Lstm(LstmParams),
    Gru(GruParams),
}

impl Layer {
    pub fn input_width(&self) -> usize {
        match self {
            Layer::Lstm(p) => p.d_i(),
            Layer::Gru(p) => p.d_i(),
        }
    }

    pub fn tensors(&self) -> Vec<&Tensor2> {
        match self {
            Layer::Lstm(p) => p.tensors(),
            Layer::Gru(p) => p.tensors(),
        }
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor2> {
        match self {
            Layer::Lstm(p) => p.tensors_mut(),
            Layer::Gru(p) => p.tensors_mut(),
        }
    }
}

#[derive(Debug, Clone)]
enum StepCache {
    Lstm(LstmCache),
    Gru(GruCache),
}

/// Activations recorded by one window's forward pass.
#[derive(Debug, Clone)]
pub struct WindowTrace {
    /// `steps[t][k]`: layer `k` at timestep `t`.
    steps: Vec<Vec<StepCache>>,
    top_hidden: Tensor2,
    final_states: Vec<CellState>,
}

impl WindowTrace {
    pub fn final_states(&self) -> &[CellState] {
        &self.final_states
    }

    pub fn timesteps(&self) -> usize {
        self.steps.len()
    }
}

/// Gradients in [`StackedModel::tensors`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub Vec<Tensor2>);

impl Gradients {
    pub fn global_norm(&self) -> f64 {
        self.0.iter().map(Tensor2::sum_squares).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackedModel {
    config: ModelConfig,
    layers: Vec<Layer>,
    /// `1 × hidden_width`
    head_w: Tensor2,
    /// `1 × 1`
    head_b: Tensor2,
    states: Vec<CellState>,
}

impl StackedModel {
    /// Weights uniform in `[-1/√d_h, 1/√d_h)`, biases and states zero.
    pub fn build(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let d_h = config.hidden_width;
        let bound = 1.0 / (d_h as f64).sqrt();
        let mut rng = SeededRng::new(config.seed);
        let mut layers = Vec::with_capacity(config.layers);
        for k in 0..config.layers {
            let d_i = if k == 0 { config.input_width } else { d_h };
            layers.push(match config.cell {
                CellKind::Lstm => Layer::Lstm(LstmParams::random(&mut rng, d_i, d_h, bound)?),
                CellKind::Gru => Layer::Gru(GruParams::random(&mut rng, d_i, d_h, bound)?),
            });
        }
        let head_w = rng.uniform(1, d_h, -bound, bound)?;
        let mut model = StackedModel {
            states: Vec::new(),
            config,
            layers,
            head_w,
            head_b: Tensor2::zeros(1, 1),
        };
        model.states = model.zero_states();
        Ok(model)
    }

    pub(crate) fn from_parts(config: ModelConfig, tensors: Vec<Tensor2>) -> Result<Self> {
        let mut model = StackedModel::build(config)?;
        let expected = model.tensors().len();
        if tensors.len() != expected {
            return Err(Error::Format(format!(
                "expected {expected} parameter tensors, found {}",
                tensors.len()
            )));
        }
        for (slot, t) in model.tensors_mut().into_iter().zip(tensors) {
            if slot.shape() != t.shape() {
                return Err(Error::shape("checkpoint tensor", t.shape(), slot.shape()));
            }
            *slot = t;
        }
        Ok(model)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn persisted_states(&self) -> &[CellState] {
        &self.states
    }

    /// Overwrites the carried states (stateful mode only has a use for this).
    pub fn set_persisted_states(&mut self, states: Vec<CellState>) -> Result<()> {
        if states.len() != self.layers.len() {
            return Err(Error::Parameter(format!(
                "expected {} layer states, got {}",
                self.layers.len(),
                states.len()
            )));
        }
        self.states = states;
        Ok(())
    }

    /// Parameter tensors in a fixed order: layer by layer (gate order per
    /// cell type), then head weights and head bias.
    pub fn tensors(&self) -> Vec<&Tensor2> {
        let mut out: Vec<&Tensor2> = self.layers.iter().flat_map(Layer::tensors).collect();
        out.push(&self.head_w);
        out.push(&self.head_b);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor2> {
        let mut out: Vec<&mut Tensor2> = self.layers.iter_mut().flat_map(Layer::tensors_mut).collect();
        out.push(&mut self.head_w);
        out.push(&mut self.head_b);
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    fn zero_states(&self) -> Vec<CellState> {
        let d_h = self.config.hidden_width;
        (0..self.config.layers)
            .map(|_| match self.config.cell {
                CellKind::Lstm => CellState::zeros_lstm(d_h),
                CellKind::Gru => CellState::zeros_gru(d_h),
            })
            .collect()
    }

    pub fn reset_states(&mut self) {
        self.states = self.zero_states();
    }

    /// States a window would start from without mutating anything.
    pub fn initial_states(&self) -> Vec<CellState> {
        match self.config.mode {
            StateMode::Stateless => self.zero_states(),
            StateMode::Stateful => self.states.clone(),
        }
    }

    fn check_window(&self, w: &Window) -> Result<()> {
        let want = (self.config.lookback, self.config.input_width);
        if w.x.shape() != want {
            return Err(Error::shape("window", w.x.shape(), want));
        }
        Ok(())
    }

    /// Runs one window from explicit initial states. Never touches `self.states`.
    pub fn run_window(&self, w: &Window, init: &[CellState]) -> Result<(f64, WindowTrace)> {
        self.check_window(w)?;
        if init.len() != self.layers.len() {
            return Err(Error::Parameter(format!(
                "expected {} initial states, got {}",
                self.layers.len(),
                init.len()
            )));
        }
        let mut states = init.to_vec();
        let mut steps = Vec::with_capacity(w.x.rows());
        for t in 0..w.x.rows() {
            let mut input = w.x.row_as_column(t);
            let mut caches = Vec::with_capacity(self.layers.len());
            for (layer, state) in self.layers.iter().zip(states.iter_mut()) {
                let (next, cache) = match layer {
                    Layer::Lstm(p) => {
                        let (n, c) = lstm_forward(&input, state, p)?;
                        (n, StepCache::Lstm(c))
                    }
                    Layer::Gru(p) => {
                        let (n, c) = gru_forward(&input, state, p)?;
                        (n, StepCache::Gru(c))
                    }
                };
                input = next.h.clone();
                *state = next;
                caches.push(cache);
            }
            steps.push(caches);
        }
        let top_hidden = states.last().expect("at least one layer").h.clone();
        let prediction = self.head_w.matmul(&top_hidden)?.data()[0] + self.head_b.data()[0];
        Ok((
            prediction,
            WindowTrace {
                steps,
                top_hidden,
                final_states: states,
            },
        ))
    }

    /// Forward pass honoring the state mode; stateful models keep the final states.
    pub fn forward_window(&mut self, w: &Window) -> Result<(f64, WindowTrace)> {
        let (prediction, trace) = self.run_window(w, &self.initial_states())?;
        if self.config.mode == StateMode::Stateful {
            self.states = trace.final_states.clone();
        }
        Ok((prediction, trace))
    }

    pub fn predict(&mut self, w: &Window) -> Result<f64> {
        self.forward_window(w).map(|(p, _)| p)
    }

    /// Prediction for `w` from the states a window would start from, without side effects.
    pub fn prediction(&self, w: &Window) -> Result<f64> {
        self.run_window(w, &self.initial_states()).map(|(p, _)| p)
    }

    /// Squared-error loss of `w`, without side effects.
    pub fn loss(&self, w: &Window) -> Result<f64> {
        let p = self.prediction(w)?;
        Ok((p - w.y) * (p - w.y))
    }

    /// Forward plus full backpropagation through time over one window.
    ///
    /// Returns the squared-error loss and its gradient for every parameter
    /// tensor. Stateful models carry the final states forward exactly as
    /// [`forward_window`](Self::forward_window) does.
    pub fn bptt_window(&mut self, w: &Window) -> Result<(f64, Gradients)> {
        let (prediction, trace) = self.forward_window(w)?;
        let loss = (prediction - w.y) * (prediction - w.y);
        let grads = self.backward(&trace, 2.0 * (prediction - w.y))?;
        Ok((loss, grads))
    }

    /// Gradients of a loss whose derivative w.r.t. the prediction is `d_pred`.
    pub fn backward(&self, trace: &WindowTrace, d_pred: f64) -> Result<Gradients> {
        let d_h = self.config.hidden_width;
        let mut layer_grads: Vec<Layer> = self
            .layers
            .iter()
            .map(|l| match l {
                Layer::Lstm(p) => Layer::Lstm(LstmParams::zeros(p.d_i(), d_h)),
                Layer::Gru(p) => Layer::Gru(GruParams::zeros(p.d_i(), d_h)),
            })
            .collect();

        let head_w_grad = trace.top_hidden.transpose().scale(d_pred);
        let head_b_grad = Tensor2::filled(1, 1, d_pred);

        let zeros = Tensor2::zeros(d_h, 1);
        let mut dh_next = vec![zeros.clone(); self.layers.len()];
        let mut dc_next = vec![zeros.clone(); self.layers.len()];

        for (t, caches) in trace.steps.iter().enumerate().rev() {
            let mut from_above = if t + 1 == trace.steps.len() {
                self.head_w.transpose().scale(d_pred)
            } else {
                zeros.clone()
            };
            for k in (0..self.layers.len()).rev() {
                let dh = dh_next[k].add(&from_above)?;
                match (&self.layers[k], &caches[k], &mut layer_grads[k]) {
                    (Layer::Lstm(p), StepCache::Lstm(cache), Layer::Lstm(g)) => {
                        let back = lstm_backward(cache, &dh, &dc_next[k], p)?;
                        for (acc, d) in g.tensors_mut().into_iter().zip(back.grads.tensors()) {
                            acc.add_assign(d)?;
                        }
                        dh_next[k] = back.dh_prev;
                        dc_next[k] = back.dc_prev;
                        from_above = back.dx;
                    }
                    (Layer::Gru(p), StepCache::Gru(cache), Layer::Gru(g)) => {
                        let back = gru_backward(cache, &dh, p)?;
                        for (acc, d) in g.tensors_mut().into_iter().zip(back.grads.tensors()) {
                            acc.add_assign(d)?;
                        }
                        dh_next[k] = back.dh_prev;
                        from_above = back.dx;
                    }
                    _ => unreachable!("layer and cache kinds always agree"),
                }
            }
        }

        let mut out: Vec<Tensor2> = layer_grads
            .iter()
            .flat_map(|l| l.tensors().into_iter().cloned())
            .collect();
        out.push(head_w_grad);
        out.push(head_b_grad);
        Ok(Gradients(out))
    }
}
