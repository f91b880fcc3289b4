//! Event-driven simulation of the GI/G/1 single-server FCFS queue.
//!
//! One customer is already present and enters service at time 0. Arrivals
//! after time 0 form a renewal process with the interarrival law; the server
//! starts the next service at the later of the arrival epoch and the previous
//! departure epoch, and idle time accrues whenever the system is empty.
//!
//! An observation window records the completed interarrival gaps `u_1..u_A`,
//! the completed service times `v_1..v_D`, the counts `A(T)`/`D(T)`, and the
//! total idle time `γ(T)` up to the stopping time `T`. Intervals still in
//! progress at `T` are excluded from the lists; they only enter the full
//! likelihood through its censoring factors.
//!
//! Conventions, fixed for reproducibility:
//! - the time-0 customer is not counted in `A(T)`; its completed service is
//!   in the `v` list like any other;
//! - when an arrival and a departure coincide, the departure is processed
//!   first;
//! - on each arrival the next interarrival gap is drawn before the service
//!   time of a service that starts at that instant, and the time-0 setup
//!   draws the first gap before the first service time.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expfam::{check_theta, Model};

/// Hard cap on events per window, guarding pathological configurations.
const EVENT_CEILING: u64 = 100_000_000;

/// How observation ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingRule {
    /// Observe until a fixed time `t`.
    FixedTime(f64),
    /// Observe until `d` departures have occurred.
    FixedDepartures(u64),
    /// Observe until `m` arrivals have taken place.
    FixedArrivals(u64),
    /// Stop at the `n`th transition (arrival or departure) epoch.
    FixedTransitions(u64),
}

impl StoppingRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StoppingRule::FixedTime(t) if !(t.is_finite() && t > 0.0) => Err(Error::Precondition(
                format!("fixed_time horizon must be positive and finite, got {t}"),
            )),
            StoppingRule::FixedDepartures(d) if d < 1 => Err(Error::Precondition(
                "fixed_departures target must be at least 1".into(),
            )),
            StoppingRule::FixedArrivals(m) if m < 1 => Err(Error::Precondition(
                "fixed_arrivals target must be at least 1".into(),
            )),
            StoppingRule::FixedTransitions(n) if n < 2 => Err(Error::Precondition(
                "fixed_transitions target must be at least 2".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// One observed sample path of the queue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationWindow {
    /// Value of the stopping time `T`.
    pub t: f64,
    /// Number of arrivals in `(0, T]`.
    pub a_count: u64,
    /// Number of departures in `(0, T]`.
    pub d_count: u64,
    /// Completed interarrival gaps `u_1..u_{A(T)}`.
    pub arrivals: Vec<f64>,
    /// Completed service times `v_1..v_{D(T)}`.
    pub services: Vec<f64>,
    /// Total idle time `γ(T)`.
    pub idle: f64,
    /// Whether a customer was present (and in service) at time 0.
    pub initial_customer_present: bool,
}

impl ObservationWindow {
    pub fn sum_arrivals(&self) -> f64 {
        self.arrivals.iter().sum()
    }

    pub fn sum_services(&self) -> f64 {
        self.services.iter().sum()
    }

    /// Check the structural invariants, with a float-accumulation tolerance
    /// on the timing identities.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Input(msg));
        if self.a_count as usize != self.arrivals.len() {
            return fail(format!(
                "a_count {} does not match {} recorded gaps",
                self.a_count,
                self.arrivals.len()
            ));
        }
        if self.d_count as usize != self.services.len() {
            return fail(format!(
                "d_count {} does not match {} recorded services",
                self.d_count,
                self.services.len()
            ));
        }
        if !(self.t.is_finite() && self.t >= 0.0) {
            return fail(format!("stopping time {} is not a nonnegative real", self.t));
        }
        if !(self.idle.is_finite() && self.idle >= 0.0) {
            return fail(format!("idle time {} is not a nonnegative real", self.idle));
        }
        if self.arrivals.iter().any(|&u| !(u > 0.0)) {
            return fail("all interarrival gaps must be positive".into());
        }
        if self.services.iter().any(|&v| !(v > 0.0)) {
            return fail("all service times must be positive".into());
        }
        let tol = 1e-9 * self.t.max(1.0);
        if self.sum_arrivals() > self.t + tol {
            return fail(format!(
                "arrival gaps sum to {} which exceeds T = {}",
                self.sum_arrivals(),
                self.t
            ));
        }
        if self.idle + self.sum_services() > self.t + tol {
            return fail(format!(
                "idle {} plus services {} exceeds T = {}",
                self.idle,
                self.sum_services(),
                self.t
            ));
        }
        let max_departures = self.a_count + u64::from(self.initial_customer_present);
        if self.d_count > max_departures {
            return fail(format!(
                "{} departures exceed the {} customers available",
                self.d_count, max_departures
            ));
        }
        Ok(())
    }
}

enum Event {
    Arrival,
    Departure,
}

/// Queue state advanced one transition at a time.
struct Engine<'a> {
    arrival: &'a dyn Model,
    theta: f64,
    service: &'a dyn Model,
    phi: f64,
    rng: &'a mut dyn RngCore,
    now: f64,
    in_system: u64,
    next_arrival: f64,
    pending_gap: f64,
    next_departure: f64,
    pending_service: f64,
    arrivals: Vec<f64>,
    services: Vec<f64>,
    idle: f64,
    idle_since: f64,
    events: u64,
}

impl<'a> Engine<'a> {
    fn new(
        arrival: &'a dyn Model,
        theta: f64,
        service: &'a dyn Model,
        phi: f64,
        rng: &'a mut dyn RngCore,
    ) -> Result<Self> {
        check_theta(arrival, theta)?;
        check_theta(service, phi)?;
        let mut engine = Engine {
            arrival,
            theta,
            service,
            phi,
            rng,
            now: 0.0,
            in_system: 1,
            next_arrival: 0.0,
            pending_gap: 0.0,
            next_departure: 0.0,
            pending_service: 0.0,
            arrivals: Vec::new(),
            services: Vec::new(),
            idle: 0.0,
            idle_since: 0.0,
            events: 0,
        };
        engine.pending_gap = engine.draw_gap()?;
        engine.next_arrival = engine.pending_gap;
        engine.pending_service = engine.draw_service()?;
        engine.next_departure = engine.pending_service;
        Ok(engine)
    }

    fn draw_gap(&mut self) -> Result<f64> {
        let u = self.arrival.sample_raw(self.theta, self.rng);
        if u > 0.0 && u.is_finite() {
            Ok(u)
        } else {
            Err(Error::SimulationFault(format!(
                "arrival sampler produced a nonpositive gap {u}"
            )))
        }
    }

    fn draw_service(&mut self) -> Result<f64> {
        let v = self.service.sample_raw(self.phi, self.rng);
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::SimulationFault(format!(
                "service sampler produced a nonpositive duration {v}"
            )))
        }
    }

    fn next_event_time(&self) -> f64 {
        self.next_arrival.min(self.next_departure)
    }

    /// Process the next transition; departures win ties.
    fn step(&mut self) -> Result<Event> {
        self.events += 1;
        if self.events > EVENT_CEILING {
            return Err(Error::SimulationFault(format!(
                "event ceiling of {EVENT_CEILING} transitions exceeded"
            )));
        }
        if self.next_departure <= self.next_arrival {
            self.now = self.next_departure;
            self.services.push(self.pending_service);
            self.in_system -= 1;
            if self.in_system > 0 {
                self.pending_service = self.draw_service()?;
                self.next_departure = self.now + self.pending_service;
            } else {
                self.next_departure = f64::INFINITY;
                self.idle_since = self.now;
            }
            Ok(Event::Departure)
        } else {
            self.now = self.next_arrival;
            self.arrivals.push(self.pending_gap);
            let was_empty = self.in_system == 0;
            self.in_system += 1;
            if was_empty {
                self.idle += self.now - self.idle_since;
            }
            self.pending_gap = self.draw_gap()?;
            self.next_arrival = self.now + self.pending_gap;
            if was_empty {
                self.pending_service = self.draw_service()?;
                self.next_departure = self.now + self.pending_service;
            }
            Ok(Event::Arrival)
        }
    }

    /// Snapshot the window observed up to time `t` (no event beyond `t` may
    /// have been processed).
    fn window_at(&self, t: f64) -> ObservationWindow {
        let idle = if self.in_system == 0 {
            self.idle + (t - self.idle_since)
        } else {
            self.idle
        };
        ObservationWindow {
            t,
            a_count: self.arrivals.len() as u64,
            d_count: self.services.len() as u64,
            arrivals: self.arrivals.clone(),
            services: self.services.clone(),
            idle,
            initial_customer_present: true,
        }
    }
}

/// Observe one sample path under the given stopping rule.
pub fn simulate(
    arrival: &dyn Model,
    theta: f64,
    service: &dyn Model,
    phi: f64,
    rule: StoppingRule,
    rng: &mut dyn RngCore,
) -> Result<ObservationWindow> {
    rule.validate()?;
    let mut engine = Engine::new(arrival, theta, service, phi, rng)?;
    match rule {
        StoppingRule::FixedTime(horizon) => {
            while engine.next_event_time() <= horizon {
                engine.step()?;
            }
            Ok(engine.window_at(horizon))
        }
        StoppingRule::FixedDepartures(d) => {
            loop {
                if let Event::Departure = engine.step()? {
                    if engine.services.len() as u64 == d {
                        break;
                    }
                }
            }
            Ok(engine.window_at(engine.now))
        }
        StoppingRule::FixedArrivals(m) => {
            loop {
                if let Event::Arrival = engine.step()? {
                    if engine.arrivals.len() as u64 == m {
                        break;
                    }
                }
            }
            Ok(engine.window_at(engine.now))
        }
        StoppingRule::FixedTransitions(n) => {
            while engine.events < n {
                engine.step()?;
            }
            Ok(engine.window_at(engine.now))
        }
    }
}

/// Observe a single sample path at each time of an ascending grid.
///
/// The windows are nested: each later window extends the earlier one's
/// lists, and the window at grid time `g` is identical to
/// `simulate(.., FixedTime(g), ..)` run on a fresh copy of the same stream.
pub fn checkpoints(
    arrival: &dyn Model,
    theta: f64,
    service: &dyn Model,
    phi: f64,
    grid: &[f64],
    rng: &mut dyn RngCore,
) -> Result<Vec<ObservationWindow>> {
    if grid.is_empty() {
        return Err(Error::Precondition("checkpoint grid is empty".into()));
    }
    for pair in grid.windows(2) {
        if !(pair[0] < pair[1]) {
            return Err(Error::Precondition(format!(
                "checkpoint grid must be strictly increasing, got {} then {}",
                pair[0], pair[1]
            )));
        }
    }
    if !(grid[0] > 0.0) {
        return Err(Error::Precondition(format!(
            "checkpoint grid must be positive, starts at {}",
            grid[0]
        )));
    }

    let mut engine = Engine::new(arrival, theta, service, phi, rng)?;
    let mut windows = Vec::with_capacity(grid.len());
    for &g in grid {
        while engine.next_event_time() <= g {
            engine.step()?;
        }
        windows.push(engine.window_at(g));
    }
    Ok(windows)
}
