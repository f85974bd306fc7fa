//! Name-keyed registries of interchangeable strategies.
//!
//! Every family of swappable algorithms (numerical fluxes, face
//! reconstructions, kinetic schemes, characteristic integrators, initial-data
//! profiles) implements [`Named`] and is stored as a trait object. Configs and the CLI select entries by name at runtime.

use std::fmt;
use std::sync::Arc;

use crate::burgers::{GodunovFlux, LocalLaxFriedrichs, MinmodMuscl, NumericalFlux, PiecewiseConstant, Reconstruction};
use crate::error::{Error, Result};
use crate::init::{
    BoxKinetic, BumpFluid, ConnectorFluid, ConstantFluid, FluidProfile, GaussianKinetic, KineticProfile, RiemannFluid,
    ZeroKinetic,
};
use crate::vlasov::{CharacteristicIntegrator, Deposit, ExponentialMidpoint, Interpolate, KineticScheme, Rk2Midpoint};

pub trait Named {
    fn name(&self) -> &'static str;
}

pub struct Registry<T: ?Sized + Named> {
    kind: &'static str,
    entries: Vec<Arc<T>>,
}

impl<T: ?Sized + Named> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Registry {
            kind,
            entries: Vec::new(),
        }
    }

    /// Adds a strategy, replacing any entry registered under the same name.
    pub fn register(&mut self, entry: Arc<T>) -> &mut Self {
        let name = entry.name();
        self.entries.retain(|e| e.name() != name);
        self.entries.push(entry);
        self
    }

    pub fn get(&self, name: &str) -> Result<Arc<T>> {
        self.entries
            .iter()
            .find(|e| e.name() == name)
            .cloned()
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.iter().any(|e| e.name() == name)
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }
}

impl<T: ?Sized + Named> fmt::Debug for Registry<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("kind", &self.kind)
            .field("entries", &self.names())
            .finish()
    }
}

/// All strategy families used by a simulation.
#[derive(Debug)]
pub struct Registries {
    pub fluxes: Registry<dyn NumericalFlux>,
    pub reconstructions: Registry<dyn Reconstruction>,
    pub kinetic_schemes: Registry<dyn KineticScheme>,
    pub integrators: Registry<dyn CharacteristicIntegrator>,
    pub fluid_profiles: Registry<dyn FluidProfile>,
    pub kinetic_profiles: Registry<dyn KineticProfile>,
}

impl Registries {
    pub fn builtin() -> Self {
        let mut fluxes: Registry<dyn NumericalFlux> = Registry::new("numerical flux");
        fluxes
            .register(Arc::new(LocalLaxFriedrichs))
            .register(Arc::new(GodunovFlux));

        let mut reconstructions: Registry<dyn Reconstruction> = Registry::new("reconstruction");
        reconstructions
            .register(Arc::new(MinmodMuscl))
            .register(Arc::new(PiecewiseConstant));

        let mut kinetic_schemes: Registry<dyn KineticScheme> = Registry::new("kinetic scheme");
        kinetic_schemes
            .register(Arc::new(Deposit))
            .register(Arc::new(Interpolate));

        let mut integrators: Registry<dyn CharacteristicIntegrator> = Registry::new("characteristic integrator");
        integrators
            .register(Arc::new(ExponentialMidpoint))
            .register(Arc::new(Rk2Midpoint));

        let mut fluid_profiles: Registry<dyn FluidProfile> = Registry::new("fluid initial profile");
        fluid_profiles
            .register(Arc::new(RiemannFluid))
            .register(Arc::new(BumpFluid))
            .register(Arc::new(ConnectorFluid))
            .register(Arc::new(ConstantFluid));

        let mut kinetic_profiles: Registry<dyn KineticProfile> = Registry::new("kinetic initial profile");
        kinetic_profiles
            .register(Arc::new(ZeroKinetic))
            .register(Arc::new(GaussianKinetic))
            .register(Arc::new(BoxKinetic));

        Registries {
            fluxes,
            reconstructions,
            kinetic_schemes,
            integrators,
            fluid_profiles,
            kinetic_profiles,
        }
    }
}

impl Default for Registries {
    fn default() -> Self {
        Registries::builtin()
    }
}
