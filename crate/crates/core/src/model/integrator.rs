//! Implicit trapezoidal time integration of the assembled network.
//!
//! The radiant star node carries no capacity, so the linear system is
//! Schur-reduced onto the capacitive nodes before stepping; the star
//! temperature is reconstructed algebraically after each step. Sources are
//! evaluated at both step endpoints (exact for linearly interpolated weather
//! and zero-order-held actuation), while the window-airing conductance is
//! frozen at its start-of-step value, keeping each step linear.

use super::airflow::window_airflow;
use super::control::active_setpoint;
use super::heat_pump::heat_pump_power;
use super::network::{assemble_network, BoundaryKind, NetworkError, ThermalNetwork};
use super::*;
use crate::weather::solar::SurfaceIrradiance;
use crate::weather::WeatherSample;
use nalgebra::{DMatrix, DVector, Dyn};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StepError {
    #[error("non-finite state at t={time_s} s")]
    NonFiniteState { time_s: f64 },
    #[error("trapezoidal system factorization failed")]
    SingularSystem,
}

/// Inputs for one integration step. Weather and irradiance are sampled at
/// both step endpoints; gains and actuation are held over the step.
#[derive(Debug, Clone, Copy)]
pub struct StepInputs {
    pub weather_start: WeatherSample,
    pub weather_end: WeatherSample,
    pub irradiance_start: SurfaceIrradiance,
    pub irradiance_end: SurfaceIrradiance,
    /// Total internal gains over the step, W.
    pub gains_w: f64,
    pub actuation: Actuation,
}

/// Cumulative energy bookkeeping over a simulation, J. Loss terms are
/// positive when heat leaves the zone.
#[derive(Debug, Clone, Copy, Default)]
pub struct EnergyLedger {
    pub heating_j: f64,
    pub cooling_j: f64,
    pub electrical_j: f64,
    pub gains_j: f64,
    pub solar_transmitted_j: f64,
    pub solar_absorbed_j: f64,
    pub loss_ambient_j: f64,
    pub loss_ground_j: f64,
    pub loss_window_j: f64,
    pub loss_ventilation_j: f64,
}

impl EnergyLedger {
    /// Heat delivered into the network.
    pub fn injected_j(&self) -> f64 {
        self.heating_j + self.gains_j + self.solar_transmitted_j + self.solar_absorbed_j
    }

    /// Heat leaving through boundaries.
    pub fn losses_j(&self) -> f64 {
        self.loss_ambient_j + self.loss_ground_j + self.loss_window_j + self.loss_ventilation_j
    }
}

/// Solar power transmitted through the glazing, W.
pub fn transmitted_solar_w(model: &ResolvedModel, irradiance: &SurfaceIrradiance) -> f64 {
    let w = &model.windows;
    let per = [
        irradiance.south,
        irradiance.west,
        irradiance.north,
        irradiance.east,
    ];
    let aperture: f64 = w.areas_m2.iter().zip(per).map(|(a, irr)| a * irr).sum();
    w.g_value * w.transparent_fraction * aperture
}

fn surface_value(orientation: Orientation, irr: &SurfaceIrradiance) -> f64 {
    match orientation {
        Orientation::South => irr.south,
        Orientation::West => irr.west,
        Orientation::North => irr.north,
        Orientation::East => irr.east,
        Orientation::Horizontal => irr.horizontal,
        _ => 0.0,
    }
}

struct Endpoint<'a> {
    weather: &'a WeatherSample,
    irradiance: &'a SurfaceIrradiance,
}

/// Stepping engine bound to one resolved model and a fixed step size.
pub struct Simulator {
    model: ResolvedModel,
    net: ThermalNetwork,
    dt: f64,
    /// Reduced node count (all capacitive nodes).
    m: usize,
    /// Reduced conductance matrix without the ventilation coupling.
    a_red: DMatrix<f64>,
    /// Conductances from capacitive nodes to the radiant star node.
    rad_col: DVector<f64>,
    /// Diagonal of the radiant star row.
    a_zz: f64,
    /// Radiant injection distribution weights (sum to one).
    dist: DVector<f64>,
    cap: DVector<f64>,
    lu: Option<nalgebra::linalg::LU<f64, Dyn, Dyn>>,
    lu_g_v: f64,
    x: DVector<f64>,
    x0: DVector<f64>,
    radiant_c: f64,
    time_s: f64,
    ledger: EnergyLedger,
    // Scratch buffers, reused across steps.
    q_a: DVector<f64>,
    q_b: DVector<f64>,
    rhs: DVector<f64>,
}

impl Simulator {
    pub fn new(model: &ResolvedModel, dt_s: f64) -> Result<Self, NetworkError> {
        assert!(dt_s > 0.0, "step size must be positive");
        let net = assemble_network(model)?;
        let m = net.n_states() - 1;
        let radiant = net.radiant_index();

        let a_full = net.conductance_matrix();
        let a_xx = a_full.view((0, 0), (m, m)).into_owned();
        let rad_col = -a_full.view((0, radiant), (m, 1)).column(0).into_owned();
        let a_zz = a_full[(radiant, radiant)];
        let a_red = &a_xx - &rad_col * rad_col.transpose() / a_zz;
        let dist = &rad_col / a_zz;
        let cap = net.capacities_j_k().rows(0, m).into_owned();

        let t0 = model.initial_temperature_c;
        let x = DVector::from_element(m, t0);
        Ok(Simulator {
            model: model.clone(),
            dt: dt_s,
            m,
            a_red,
            rad_col,
            a_zz,
            dist,
            cap,
            lu: None,
            lu_g_v: f64::NAN,
            x0: x.clone(),
            radiant_c: t0,
            x,
            time_s: 0.0,
            ledger: EnergyLedger::default(),
            q_a: DVector::zeros(m),
            q_b: DVector::zeros(m),
            rhs: DVector::zeros(m),
            net,
        })
    }

    pub fn model(&self) -> &ResolvedModel {
        &self.model
    }

    pub fn network(&self) -> &ThermalNetwork {
        &self.net
    }

    pub fn dt_s(&self) -> f64 {
        self.dt
    }

    pub fn time_s(&self) -> f64 {
        self.time_s
    }

    pub fn air_temperature_c(&self) -> f64 {
        self.x[self.net.air_index()]
    }

    pub fn radiant_temperature_c(&self) -> f64 {
        self.radiant_c
    }

    pub fn ledger(&self) -> &EnergyLedger {
        &self.ledger
    }

    pub fn state(&self) -> ZoneState {
        ZoneState {
            time_s: self.time_s,
            air_temperature_c: self.air_temperature_c(),
            radiant_node_temperature_c: self.radiant_c,
            component_temperatures_c: self.x.as_slice()[..3 * self.net.n_components()].to_vec(),
            cumulative_heating_j: self.ledger.heating_j,
            cumulative_cooling_j: self.ledger.cooling_j,
            cumulative_electrical_j: self.ledger.electrical_j,
        }
    }

    /// Change in stored internal energy since the start, J.
    pub fn delta_internal_j(&self) -> f64 {
        self.cap.dot(&(&self.x - &self.x0))
    }

    /// Conservation residual: injected minus removed minus losses minus the
    /// change in stored energy. Near zero up to floating-point error.
    pub fn energy_balance_residual_j(&self) -> f64 {
        self.ledger.injected_j()
            - self.ledger.cooling_j
            - self.ledger.losses_j()
            - self.delta_internal_j()
    }

    /// Total ventilation conductance at the given operating point, W/K.
    pub fn ventilation_conductance(&self, window_open: f64, t_air_c: f64, t_out_c: f64) -> f64 {
        let flow = window_airflow(&self.model.windows, window_open, t_air_c, t_out_c);
        self.net.g_vent_mech + RHO_AIR * CP_AIR * flow
    }

    /// Solar power transmitted through the glazing, W.
    pub fn transmitted_solar_w(&self, irradiance: &SurfaceIrradiance) -> f64 {
        transmitted_solar_w(&self.model, irradiance)
    }

    /// Fills `q` with the forcing vector at one endpoint and returns the
    /// radiant-node injection.
    fn forcing_into(
        model: &ResolvedModel,
        net: &ThermalNetwork,
        at: &Endpoint,
        gains_w: f64,
        act: Actuation,
        g_vent: f64,
        q: &mut DVector<f64>,
    ) -> f64 {
        let air = net.air_index();
        let q_hc = act.u_heat * model.nominal_heating_power_w
            - act.u_cool * model.nominal_cooling_power_w;
        let t_out = at.weather.dry_bulb_c;
        let transmitted = transmitted_solar_w(model, at.irradiance);

        q.fill(0.0);
        q[air] += model.splits.heating_convective * q_hc
            + model.splits.gains_convective * gains_w
            + (net.g_window + g_vent) * t_out;
        let mut q_rad = (1.0 - model.splits.heating_convective) * q_hc
            + (1.0 - model.splits.gains_convective) * gains_w;

        for c in &net.comps {
            if let Some((kind, g_b)) = c.boundary {
                let t_b = match kind {
                    BoundaryKind::Ambient => t_out,
                    BoundaryKind::Ground => model.ground_temperature_c,
                };
                q[c.base] += g_b * t_b;
            }
            if c.exterior_solar_weight > 0.0 {
                q[c.base] += c.exterior_solar_weight
                    * c.solar_aperture_m2
                    * surface_value(c.orientation, at.irradiance);
            }
            let phi = c.interior_share * transmitted;
            q[c.base + 2] += c.star_weights[0] * phi;
            q[air] += c.star_weights[1] * phi;
            q_rad += c.star_weights[2] * phi;
        }
        q_rad
    }

    /// Advances the state by one step.
    pub fn step(&mut self, inputs: &StepInputs) -> Result<(), StepError> {
        let act = inputs.actuation.clamped();
        let air = self.net.air_index();
        let g_vent = self.ventilation_conductance(
            act.window_open,
            self.x[air],
            inputs.weather_start.dry_bulb_c,
        );

        if self.lu.is_none() || g_vent != self.lu_g_v {
            let two_over_dt = 2.0 / self.dt;
            let mut m_mat = self.a_red.clone();
            for i in 0..self.m {
                m_mat[(i, i)] += two_over_dt * self.cap[i];
            }
            m_mat[(air, air)] += g_vent;
            self.lu = Some(m_mat.lu());
            self.lu_g_v = g_vent;
        }

        let q_rad_a = Self::forcing_into(
            &self.model,
            &self.net,
            &Endpoint {
                weather: &inputs.weather_start,
                irradiance: &inputs.irradiance_start,
            },
            inputs.gains_w,
            act,
            g_vent,
            &mut self.q_a,
        );
        let q_rad_b = Self::forcing_into(
            &self.model,
            &self.net,
            &Endpoint {
                weather: &inputs.weather_end,
                irradiance: &inputs.irradiance_end,
            },
            inputs.gains_w,
            act,
            g_vent,
            &mut self.q_b,
        );

        // rhs = (2C/dt) x - A_red x - g_v x_air e_air + q_a + q_b
        //       + dist * (q_rad_a + q_rad_b)
        for i in 0..self.m {
            self.rhs[i] = 2.0 / self.dt * self.cap[i] * self.x[i];
        }
        self.rhs.gemv(-1.0, &self.a_red, &self.x, 1.0);
        self.rhs[air] -= g_vent * self.x[air];
        let q_rad_sum = q_rad_a + q_rad_b;
        for i in 0..self.m {
            self.rhs[i] += self.q_a[i] + self.q_b[i] + self.dist[i] * q_rad_sum;
        }

        let mut x_new = self.rhs.clone();
        if !self.lu.as_ref().unwrap().solve_mut(&mut x_new) {
            return Err(StepError::SingularSystem);
        }

        self.update_ledger(inputs, &act, g_vent, &x_new);
        self.x.copy_from(&x_new);
        self.radiant_c = (q_rad_b + self.rad_col.dot(&self.x)) / self.a_zz;
        self.time_s += self.dt;

        if !self.x.iter().all(|v| v.is_finite()) || !self.radiant_c.is_finite() {
            return Err(StepError::NonFiniteState { time_s: self.time_s });
        }
        Ok(())
    }

    fn update_ledger(
        &mut self,
        inputs: &StepInputs,
        act: &Actuation,
        g_vent: f64,
        x_new: &DVector<f64>,
    ) {
        let dt = self.dt;
        let half_dt = 0.5 * dt;
        let air = self.net.air_index();
        let x_old = &self.x;

        let q_heat = act.u_heat * self.model.nominal_heating_power_w;
        let q_cool = act.u_cool * self.model.nominal_cooling_power_w;
        self.ledger.heating_j += q_heat * dt;
        self.ledger.cooling_j += q_cool * dt;
        self.ledger.gains_j += inputs.gains_w * dt;

        let setpoint = active_setpoint(&self.model.controller, self.time_s);
        let hp = heat_pump_power(
            &self.model.heat_pump,
            q_heat,
            inputs.weather_start.dry_bulb_c,
            setpoint,
        );
        self.ledger.electrical_j += hp.electrical_power_w * dt;

        let trans_a = transmitted_solar_w(&self.model, &inputs.irradiance_start);
        let trans_b = transmitted_solar_w(&self.model, &inputs.irradiance_end);
        self.ledger.solar_transmitted_j += half_dt * (trans_a + trans_b);

        let (t_out_a, t_out_b) = (
            inputs.weather_start.dry_bulb_c,
            inputs.weather_end.dry_bulb_c,
        );
        for c in &self.net.comps {
            if c.exterior_solar_weight > 0.0 {
                self.ledger.solar_absorbed_j += half_dt
                    * c.exterior_solar_weight
                    * c.solar_aperture_m2
                    * (surface_value(c.orientation, &inputs.irradiance_start)
                        + surface_value(c.orientation, &inputs.irradiance_end));
            }
            if let Some((kind, g_b)) = c.boundary {
                match kind {
                    BoundaryKind::Ambient => {
                        self.ledger.loss_ambient_j += half_dt
                            * g_b
                            * ((x_old[c.base] - t_out_a) + (x_new[c.base] - t_out_b));
                    }
                    BoundaryKind::Ground => {
                        let t_g = self.model.ground_temperature_c;
                        self.ledger.loss_ground_j += half_dt
                            * g_b
                            * ((x_old[c.base] - t_g) + (x_new[c.base] - t_g));
                    }
                }
            }
        }
        self.ledger.loss_window_j += half_dt
            * self.net.g_window
            * ((x_old[air] - t_out_a) + (x_new[air] - t_out_b));
        self.ledger.loss_ventilation_j +=
            half_dt * g_vent * ((x_old[air] - t_out_a) + (x_new[air] - t_out_b));
    }

    /// Full-system steady state for fixed inputs; independent of the time
    /// stepping path (direct linear solve on the assembled matrix).
    pub fn steady_state(
        &self,
        weather: &WeatherSample,
        irradiance: &SurfaceIrradiance,
        gains_w: f64,
        actuation: Actuation,
    ) -> Result<Vec<f64>, NetworkError> {
        let act = actuation.clamped();
        let air = self.net.air_index();
        let g_vent = self.ventilation_conductance(act.window_open, self.x[air], weather.dry_bulb_c);
        let mut q_x = DVector::zeros(self.m);
        let q_rad = Self::forcing_into(
            &self.model,
            &self.net,
            &Endpoint {
                weather,
                irradiance,
            },
            gains_w,
            act,
            g_vent,
            &mut q_x,
        );
        let n = self.net.n_states();
        let mut q_full = DVector::zeros(n);
        q_full.rows_mut(0, self.m).copy_from(&q_x);
        q_full[self.net.radiant_index()] = q_rad;
        let mut a = self.net.conductance_matrix().clone();
        a[(air, air)] += g_vent;
        a.lu()
            .solve(&q_full)
            .map(|v| v.as_slice().to_vec())
            .ok_or_else(|| NetworkError::SingularNetwork("steady-state solve failed".into()))
    }

    /// Copies state from a previous simulator after an operational change.
    /// Component nodes are matched by name; unmatched components start at
    /// the previous air temperature. Clock and energy totals continue.
    pub fn carry_state_from(&mut self, old: &Simulator) {
        let old_air = old.x[old.net.air_index()];
        for (k, c) in self.model.components.iter().enumerate() {
            let from = old
                .model
                .components
                .iter()
                .position(|o| o.name == c.name)
                .map(|j| 3 * j);
            for i in 0..3 {
                self.x[3 * k + i] = match from {
                    Some(base) => old.x[base + i],
                    None => old_air,
                };
            }
        }
        self.x[self.net.air_index()] = old_air;
        self.radiant_c = old.radiant_c;
        self.time_s = old.time_s;
        self.ledger = old.ledger;
        if old.x0.len() == self.x0.len() {
            self.x0 = old.x0.clone();
        } else {
            // Structure changed: stored-energy deltas restart from here.
            self.x0 = self.x.clone();
        }
        self.lu = None;
        self.lu_g_v = f64::NAN;
    }
}
