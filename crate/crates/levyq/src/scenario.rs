//! Resolution of a configured model into the exponent used as ground truth
//! and the compound-Poisson input that is actually simulated.

use levyq_core::{
    build_truncated_cp, burn_in, stationary_init, suggest_delta, CompoundPoisson, Error,
    LevyDensity, NetInputModel, SubordinatorSpec, WorkloadPath,
};
use rand_chacha::ChaCha8Rng;

use crate::config::{DeltaSpec, ExperimentConfig, Init};

/// Truncation metadata for infinite-activity input.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub eps: f64,
    /// `r_ε = ν(ε, ∞)`.
    pub rate: f64,
    pub x_max: f64,
    pub tail_mass: f64,
    pub table_size: usize,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub truth: NetInputModel,
    /// Exponent of the simulated input, when it differs from the truth.
    pub surrogate: Option<NetInputModel>,
    pub input: CompoundPoisson,
    pub truncation: Option<Truncation>,
}

impl Scenario {
    pub fn from_config(config: &ExperimentConfig) -> levyq_core::Result<Self> {
        let spec = config.input_spec()?;
        Self::new(spec, config.truncation_eps, config.table_size)
    }

    pub fn new(spec: SubordinatorSpec, eps: f64, table_size: usize) -> levyq_core::Result<Self> {
        let truth = NetInputModel::new(spec.clone())?;
        match &spec {
            SubordinatorSpec::CompoundPoisson(cp) => Ok(Self {
                truth,
                surrogate: None,
                input: cp.clone(),
                truncation: None,
            }),
            _ if spec.is_finite_activity() => Err(Error::InvalidModel(
                "at most one compound_poisson section is supported",
            )),
            _ => {
                let density = LevyDensity::from_spec(&spec).map_err(|_| {
                    Error::InvalidModel(
                        "compound_poisson sections cannot be mixed with gamma or inverse_gaussian sections",
                    )
                })?;
                let cp = build_truncated_cp(&density, eps, table_size)?;
                let surrogate = NetInputModel::new(SubordinatorSpec::truncated(spec, eps)?)?;
                Ok(Self {
                    truth,
                    surrogate: Some(surrogate),
                    input: cp.to_compound_poisson(),
                    truncation: Some(Truncation {
                        eps,
                        rate: cp.rate,
                        x_max: cp.x_max,
                        tail_mass: cp.tail_mass_beyond_table,
                        table_size,
                    }),
                })
            }
        }
    }

    pub fn phi_true(&self, alpha: f64) -> levyq_core::Result<f64> {
        self.truth.phi(alpha)
    }

    /// `φ_ε(α)` of the truncated input; `None` when nothing is truncated.
    pub fn phi_eps(&self, alpha: f64) -> levyq_core::Result<Option<f64>> {
        self.surrogate.as_ref().map(|m| m.phi(alpha)).transpose()
    }

    pub fn resolve_delta(&self, spec: DeltaSpec, xi: f64, horizon: f64) -> levyq_core::Result<f64> {
        match spec {
            DeltaSpec::Fixed(d) => Ok(d),
            DeltaSpec::Auto(_) => suggest_delta(xi, horizon, self.truth.bg_index()),
            DeltaSpec::Exponent { exponent } => {
                let n = xi * horizon;
                if !(n > 1.0) {
                    return Err(Error::HeuristicUndefined(n));
                }
                Ok(n.powf(-exponent))
            }
        }
    }

    pub fn initial_workload(
        &self,
        init: Init,
        burn_in_time: Option<f64>,
        rng: &mut ChaCha8Rng,
    ) -> levyq_core::Result<f64> {
        match init {
            Init::Stationary => stationary_init(&self.input, rng),
            Init::BurnIn => burn_in(&self.input, rng, burn_in_time),
            Init::Fixed(v0) => Ok(v0),
        }
    }

    pub fn simulate(
        &self,
        init: Init,
        burn_in_time: Option<f64>,
        horizon: f64,
        init_rng: &mut ChaCha8Rng,
        path_rng: &mut ChaCha8Rng,
    ) -> levyq_core::Result<WorkloadPath> {
        let v0 = self.initial_workload(init, burn_in_time, init_rng)?;
        WorkloadPath::simulate(&self.input, horizon, v0, path_rng)
    }
}
