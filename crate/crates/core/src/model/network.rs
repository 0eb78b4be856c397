//! Assembly of the lumped RC network.
//!
//! Node layout: 3 chain nodes per opaque component (exterior first), then
//! the air node, then the radiant star node. The massless exterior and
//! interior surface nodes of each component are eliminated algebraically
//! during assembly:
//!
//! * exterior film + first chain resistance collapse into one boundary
//!   conductance; absorbed solar splits between the first capacity node and
//!   ambient by the film/resistance ratio,
//! * the interior surface star (chain end, convective film to air,
//!   radiative film to the star node) becomes a three-way mesh with matching
//!   flux-splitting weights for transmitted solar.
//!
//! The radiant star node itself carries no capacity; the integrator treats
//! it as an algebraic node.

use super::*;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("singular network: {0}")]
    SingularNetwork(String),
}

/// Boundary condition a component couples against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Ambient,
    Ground,
}

/// Per-component coupling data used when building forcing vectors.
#[derive(Debug, Clone)]
pub(crate) struct ComponentCoupling {
    /// Index of the component's first chain node.
    pub base: usize,
    pub orientation: Orientation,
    /// Boundary conductance through exterior film + first chain resistance.
    pub boundary: Option<(BoundaryKind, f64)>,
    /// Fraction of absorbed exterior solar flux that enters the chain
    /// (remainder leaks through the exterior film to ambient).
    pub exterior_solar_weight: f64,
    /// Absorptance times area: multiplies surface irradiance, W per W/m2.
    pub solar_aperture_m2: f64,
    /// Interior-surface flux split weights: [chain end, air, radiant star].
    pub star_weights: [f64; 3],
    /// Area share of transmitted solar landing on this component.
    pub interior_share: f64,
}

/// Assembled network: full symmetric conductance matrix (Laplacian plus
/// boundary diagonal), capacities, and injection descriptors.
#[derive(Debug, Clone)]
pub struct ThermalNetwork {
    pub(crate) a: DMatrix<f64>,
    pub(crate) capacities: DVector<f64>,
    pub(crate) comps: Vec<ComponentCoupling>,
    /// Window group conductance ambient -> air node, W/K.
    pub(crate) g_window: f64,
    /// Mechanical ventilation conductance after heat recovery, W/K.
    pub(crate) g_vent_mech: f64,
    pub(crate) air: usize,
    pub(crate) radiant: usize,
}

impl ThermalNetwork {
    /// Total temperature states: three per component, air, radiant star.
    pub fn n_states(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_components(&self) -> usize {
        self.comps.len()
    }

    pub fn air_index(&self) -> usize {
        self.air
    }

    pub fn radiant_index(&self) -> usize {
        self.radiant
    }

    pub fn conductance_matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn capacities_j_k(&self) -> &DVector<f64> {
        &self.capacities
    }

    /// Steady-state temperatures for a fixed forcing vector: solves
    /// `A * T = q` on the full node set.
    pub fn solve_steady(&self, q: &DVector<f64>) -> Result<DVector<f64>, NetworkError> {
        self.a
            .clone()
            .lu()
            .solve(q)
            .ok_or_else(|| NetworkError::SingularNetwork("steady-state solve failed".into()))
    }
}

/// Builds the network for a resolved model.
pub fn assemble_network(model: &ResolvedModel) -> Result<ThermalNetwork, NetworkError> {
    let n = model.components.len();
    if n == 0 {
        return Err(NetworkError::SingularNetwork(
            "model has no opaque components".into(),
        ));
    }
    if !(model.volume_m3 > 0.0) {
        return Err(NetworkError::SingularNetwork("zone volume must be positive".into()));
    }

    let dim = 3 * n + 2;
    let air = 3 * n;
    let radiant = 3 * n + 1;
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    let mut capacities = DVector::<f64>::zeros(dim);
    let add_edge = |a: &mut DMatrix<f64>, i: usize, j: usize, g: f64| {
        a[(i, i)] += g;
        a[(j, j)] += g;
        a[(i, j)] -= g;
        a[(j, i)] -= g;
    };

    let total_area: f64 = model.components.iter().map(|c| c.area_m2).sum();
    let mut comps = Vec::with_capacity(n);

    for (k, c) in model.components.iter().enumerate() {
        let base = 3 * k;
        if !(c.area_m2 > 0.0) || !c.area_m2.is_finite() {
            return Err(NetworkError::SingularNetwork(format!(
                "component `{}` has non-positive area",
                c.name
            )));
        }
        for (i, r) in c.resistances_k_w.iter().enumerate() {
            if !(*r > 0.0) || !r.is_finite() {
                return Err(NetworkError::SingularNetwork(format!(
                    "component `{}` resistance {} must be positive",
                    c.name,
                    i + 1
                )));
            }
        }
        for (i, cap) in c.capacities_j_k.iter().enumerate() {
            if !(*cap > 0.0) || !cap.is_finite() {
                return Err(NetworkError::SingularNetwork(format!(
                    "component `{}` capacity {} must be positive",
                    c.name,
                    i + 1
                )));
            }
            capacities[base + i] = *cap;
        }

        let [r1, r2, r3, r4] = c.resistances_k_w;
        add_edge(&mut a, base, base + 1, 1.0 / r2);
        add_edge(&mut a, base + 1, base + 2, 1.0 / r3);

        // Interior surface star -> mesh between chain end, air, radiant.
        let g4 = 1.0 / r4;
        let g_conv = H_INT_CONVECTIVE * c.area_m2;
        let g_rad = H_INT_RADIATIVE * c.area_m2;
        let s = g4 + g_conv + g_rad;
        add_edge(&mut a, base + 2, air, g4 * g_conv / s);
        add_edge(&mut a, base + 2, radiant, g4 * g_rad / s);
        add_edge(&mut a, air, radiant, g_conv * g_rad / s);

        // Exterior boundary through the film and first chain resistance.
        let (boundary, exterior_solar_weight) = match c.orientation {
            Orientation::Internal => (None, 0.0),
            Orientation::Ground => {
                let r_film = 1.0 / (H_EXTERIOR * c.area_m2);
                let g_b = 1.0 / (r_film + r1);
                a[(base, base)] += g_b;
                (Some((BoundaryKind::Ground, g_b)), 0.0)
            }
            _ => {
                let r_film = 1.0 / (H_EXTERIOR * c.area_m2);
                let g_b = 1.0 / (r_film + r1);
                a[(base, base)] += g_b;
                (Some((BoundaryKind::Ambient, g_b)), r_film / (r_film + r1))
            }
        };

        comps.push(ComponentCoupling {
            base,
            orientation: c.orientation,
            boundary,
            exterior_solar_weight,
            solar_aperture_m2: c.solar_absorptance * c.area_m2,
            star_weights: [g4 / s, g_conv / s, g_rad / s],
            interior_share: c.area_m2 / total_area,
        });
    }

    let g_window = model.windows.u_value_w_m2k * model.windows.total_area_m2();
    if g_window > 0.0 {
        a[(air, air)] += g_window;
    }

    capacities[air] =
        RHO_AIR * CP_AIR * model.volume_m3 + model.additional_air_capacity_j_k.max(0.0);
    // The radiant star node stays massless: capacities[radiant] = 0.

    let g_vent_mech = RHO_AIR * CP_AIR * model.ventilation.air_change_rate.max(0.0)
        * model.volume_m3
        / 3600.0
        * (1.0 - model.ventilation.heat_recovery_rate.clamp(0.0, 1.0));

    Ok(ThermalNetwork {
        a,
        capacities,
        comps,
        g_window,
        g_vent_mech,
        air,
        radiant,
    })
}
