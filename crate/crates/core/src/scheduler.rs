//! Turning a pattern into timestamped onsets, and the tick loop that feeds
//! them to a sink while the pattern is swapped underneath it.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::controls::{ControlMap, ControlPattern};
use crate::pattern::silence;
use crate::time::{Fraction, Span};

/// Wall-clock times are seconds since the Unix epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClockConfig {
    pub cps: f64,
    /// Wall-clock time of cycle 0.
    pub origin: f64,
    pub tick_interval: f64,
    pub latency: f64,
}

impl Default for ClockConfig {
    fn default() -> Self {
        ClockConfig {
            cps: 0.5,
            origin: 0.0,
            tick_interval: 0.05,
            latency: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cps must be a positive number, got {0}")]
    Cps(f64),
    #[error("tick interval must be a positive number, got {0}")]
    TickInterval(f64),
    #[error("latency must be zero or more, got {0}")]
    Latency(f64),
}

impl ClockConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.cps.is_finite() && self.cps > 0.0) {
            return Err(ConfigError::Cps(self.cps));
        }
        if !(self.tick_interval.is_finite() && self.tick_interval > 0.0) {
            return Err(ConfigError::TickInterval(self.tick_interval));
        }
        if !(self.latency.is_finite() && self.latency >= 0.0) {
            return Err(ConfigError::Latency(self.latency));
        }
        Ok(())
    }

    /// Cycle position at wall-clock `t`, rounded to a millionth of a cycle.
    pub fn cycle_at(&self, t: f64) -> Fraction {
        Fraction::from_f64_rounded((t - self.origin) * self.cps, CYCLE_RESOLUTION)
            .unwrap_or_else(Fraction::zero)
    }

    /// Wall-clock time of cycle position `c`, without latency.
    pub fn time_of(&self, c: &Fraction) -> f64 {
        self.origin + c.to_f64() / self.cps
    }

    /// Change tempo so that cycle `c` keeps falling at wall-clock `t`.
    pub fn reanchor(&mut self, cps: f64, c: &Fraction, t: f64) {
        self.cps = cps;
        self.origin = t - c.to_f64() / cps;
    }
}

pub const CYCLE_RESOLUTION: u32 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TimedEvent {
    pub at_time: f64,
    pub duration: f64,
    pub controls: ControlMap,
    /// Onset in cycle time.
    pub cycle: Fraction,
}

/// The onsets of `p` within `span`, timestamped and sorted by send time.
pub fn schedule(p: &ControlPattern, span: &Span, cfg: &ClockConfig) -> Vec<TimedEvent> {
    let mut out: Vec<TimedEvent> = p
        .query(span)
        .into_iter()
        .filter(|e| e.has_onset())
        .filter_map(|e| {
            let whole = e.whole?;
            Some(TimedEvent {
                at_time: cfg.time_of(&whole.begin) + cfg.latency,
                duration: whole.len().to_f64() / cfg.cps,
                controls: e.value,
                cycle: whole.begin,
            })
        })
        .collect();
    out.sort_by(|a, b| a.at_time.total_cmp(&b.at_time));
    out
}

/// The live pattern, replaced atomically.
pub struct Slot {
    pattern: RwLock<Arc<ControlPattern>>,
}

impl Default for Slot {
    fn default() -> Self {
        Slot::new(silence())
    }
}

impl Slot {
    pub fn new(p: ControlPattern) -> Self {
        Slot {
            pattern: RwLock::new(Arc::new(p)),
        }
    }

    pub fn swap(&self, p: ControlPattern) {
        let mut guard = self.pattern.write().unwrap_or_else(|e| e.into_inner());
        *guard = Arc::new(p);
    }

    pub fn current(&self) -> Arc<ControlPattern> {
        Arc::clone(&self.pattern.read().unwrap_or_else(|e| e.into_inner()))
    }
}

pub type SinkError = Box<dyn std::error::Error + Send + Sync>;

pub trait Sink {
    fn send(&mut self, event: &TimedEvent, cps: f64) -> Result<(), SinkError>;

    /// Called once per tick with the cycle span just scheduled.
    fn tick(&mut self, _span: &Span) {}
}

impl<F: FnMut(&TimedEvent, f64) -> Result<(), SinkError>> Sink for F {
    fn send(&mut self, event: &TimedEvent, cps: f64) -> Result<(), SinkError> {
        self(event, cps)
    }
}

pub trait Clock {
    fn now(&self) -> f64;
    fn sleep_until(&self, t: f64);
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> f64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0.0, |d| d.as_secs_f64())
    }

    fn sleep_until(&self, t: f64) {
        let wait = t - self.now();
        if wait > 0.0 {
            std::thread::sleep(Duration::from_secs_f64(wait));
        }
    }
}

/// A clock that jumps straight to each deadline.
pub struct FakeClock {
    now: Mutex<f64>,
}

impl FakeClock {
    pub fn new(start: f64) -> Self {
        FakeClock {
            now: Mutex::new(start),
        }
    }

    pub fn advance(&self, by: f64) {
        *self.now.lock().unwrap_or_else(|e| e.into_inner()) += by;
    }
}

impl Clock for FakeClock {
    fn now(&self) -> f64 {
        *self.now.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn sleep_until(&self, t: f64) {
        let mut now = self.now.lock().unwrap_or_else(|e| e.into_inner());
        if t > *now {
            *now = t;
        }
    }
}

/// Shared handle for steering a running loop from other tasks.
#[derive(Default)]
pub struct Transport {
    stop: AtomicBool,
    cps_request: Mutex<Option<f64>>,
    cps: Mutex<Option<f64>>,
}

impl Transport {
    pub fn new() -> Self {
        Transport::default()
    }

    pub fn stop(&self) {
        self.stop.store(true, Ordering::SeqCst);
    }

    pub fn is_stopped(&self) -> bool {
        self.stop.load(Ordering::SeqCst)
    }

    /// Ask the loop to change tempo at its next tick.
    pub fn set_cps(&self, cps: f64) -> Result<(), ConfigError> {
        if !(cps.is_finite() && cps > 0.0) {
            return Err(ConfigError::Cps(cps));
        }
        *self.cps_request.lock().unwrap_or_else(|e| e.into_inner()) = Some(cps);
        Ok(())
    }

    /// The tempo the loop is currently running at, once it has started.
    pub fn cps(&self) -> Option<f64> {
        *self.cps.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn take_cps_request(&self) -> Option<f64> {
        self.cps_request.lock().unwrap_or_else(|e| e.into_inner()).take()
    }

    fn publish_cps(&self, cps: f64) {
        *self.cps.lock().unwrap_or_else(|e| e.into_inner()) = Some(cps);
    }
}

/// Run the tick loop until `transport` is stopped or `max_ticks` have run.
///
/// Tick `k` starts at `start + k * tick_interval` and schedules the cycle
/// span reaching one tick ahead. Each span begins where the last one ended,
/// so no onset is skipped or fired twice. If `cfg.origin` is zero, cycle 0
/// is placed at the moment the loop starts.
pub fn run(
    slot: &Slot,
    sink: &mut dyn Sink,
    cfg: &ClockConfig,
    clock: &dyn Clock,
    transport: &Transport,
    max_ticks: Option<u64>,
) -> Result<(), ConfigError> {
    cfg.validate()?;
    let mut cfg = cfg.clone();
    let start = clock.now();
    if cfg.origin == 0.0 {
        cfg.origin = start;
    }
    transport.publish_cps(cfg.cps);
    let mut last = cfg.cycle_at(start);
    let mut tick: u64 = 0;
    while !transport.is_stopped() && max_ticks.is_none_or(|m| tick < m) {
        let tick_start = start + tick as f64 * cfg.tick_interval;
        let horizon = tick_start + cfg.tick_interval;
        if let Some(cps) = transport.take_cps_request() {
            let at = cfg.time_of(&last);
            cfg.reanchor(cps, &last, at);
            transport.publish_cps(cps);
        }
        let end = cfg.cycle_at(horizon).max(last.clone());
        let span = Span::new(last.clone(), end.clone());
        let pattern = slot.current();
        for event in schedule(&pattern, &span, &cfg) {
            if let Err(e) = sink.send(&event, cfg.cps) {
                log::warn!("sink failed for event at cycle {}: {e}", event.cycle);
            }
        }
        sink.tick(&span);
        last = end;
        tick += 1;
        clock.sleep_until(start + tick as f64 * cfg.tick_interval);
    }
    Ok(())
}
