//! Mission reference trajectories.
//!
//! A mission is a chain of constant-velocity segments: climb, transit out,
//! hover on station, return, descend. The reference position is piecewise
//! linear in time and the controller tracks it; required flight duration at
//! any moment is simply the time left on the plan.

use serde::{Deserialize, Serialize};

use super::VehicleError;

/// Mission phase at a point in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Climb,
    Transit,
    Hover,
    Return,
    Descend,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Segment {
    t0: f64,
    t1: f64,
    from: [f64; 3],
    to: [f64; 3],
    phase: Phase,
}

/// Piecewise-linear position reference with phase annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionPlan {
    segments: Vec<Segment>,
    pub total_duration: f64,
}

impl MissionPlan {
    /// Climb, fly out along `heading` (radians from east), hold, return and
    /// descend, with leg lengths chosen to fill `total_duration`. The time
    /// after climb and descent splits 40/20/40 between outbound, station
    /// hold, and return.
    pub fn out_and_back(
        total_duration: f64,
        cruise_speed: f64,
        heading: f64,
        altitude: f64,
        climb_rate: f64,
    ) -> Result<Self, VehicleError> {
        check_positive("total_duration", total_duration)?;
        check_positive("cruise_speed", cruise_speed)?;
        check_positive("altitude", altitude)?;
        check_positive("climb_rate", climb_rate)?;
        if !heading.is_finite() {
            return Err(VehicleError::InvalidMission("heading must be finite".into()));
        }
        let t_climb = altitude / climb_rate;
        let available = total_duration - 2.0 * t_climb;
        if available <= 0.0 {
            return Err(VehicleError::InvalidMission(format!(
                "duration {total_duration} s cannot fit climb and descent of {} s",
                2.0 * t_climb
            )));
        }
        let t_out = 0.4 * available;
        let t_hold = 0.2 * available;
        let dist = cruise_speed * t_out;
        let station = [dist * heading.cos(), dist * heading.sin(), altitude];
        let top = [0.0, 0.0, altitude];
        let mut b = Builder::new();
        b.push(t_climb, [0.0, 0.0, 0.0], top, Phase::Climb);
        b.push(t_out, top, station, Phase::Transit);
        b.push(t_hold, station, station, Phase::Hover);
        b.push(t_out, station, top, Phase::Return);
        b.push(t_climb, top, [0.0, 0.0, 0.0], Phase::Descend);
        Ok(b.finish())
    }

    /// Climb, fly to `dest_xy`, hold for `dwell` seconds, return and descend.
    pub fn to_destination(
        dest_xy: [f64; 2],
        altitude: f64,
        cruise_speed: f64,
        climb_rate: f64,
        dwell: f64,
    ) -> Result<Self, VehicleError> {
        check_positive("altitude", altitude)?;
        check_positive("cruise_speed", cruise_speed)?;
        check_positive("climb_rate", climb_rate)?;
        if !(dwell >= 0.0) || !dwell.is_finite() {
            return Err(VehicleError::InvalidMission("dwell must be >= 0".into()));
        }
        if dest_xy.iter().any(|v| !v.is_finite()) {
            return Err(VehicleError::InvalidMission("destination must be finite".into()));
        }
        let t_climb = altitude / climb_rate;
        let dist = (dest_xy[0] * dest_xy[0] + dest_xy[1] * dest_xy[1]).sqrt();
        let t_transit = dist / cruise_speed;
        let top = [0.0, 0.0, altitude];
        let station = [dest_xy[0], dest_xy[1], altitude];
        let mut b = Builder::new();
        b.push(t_climb, [0.0, 0.0, 0.0], top, Phase::Climb);
        if t_transit > 0.0 {
            b.push(t_transit, top, station, Phase::Transit);
        }
        if dwell > 0.0 {
            b.push(dwell, station, station, Phase::Hover);
        }
        if t_transit > 0.0 {
            b.push(t_transit, station, top, Phase::Return);
        }
        b.push(t_climb, top, [0.0, 0.0, 0.0], Phase::Descend);
        Ok(b.finish())
    }

    /// Reference position at time `t`, clamped to the endpoints.
    pub fn reference(&self, t: f64) -> [f64; 3] {
        if t <= 0.0 {
            return self.segments.first().map(|s| s.from).unwrap_or([0.0; 3]);
        }
        for s in &self.segments {
            if t < s.t1 {
                let frac = ((t - s.t0) / (s.t1 - s.t0)).clamp(0.0, 1.0);
                return [
                    s.from[0] + frac * (s.to[0] - s.from[0]),
                    s.from[1] + frac * (s.to[1] - s.from[1]),
                    s.from[2] + frac * (s.to[2] - s.from[2]),
                ];
            }
        }
        self.segments.last().map(|s| s.to).unwrap_or([0.0; 3])
    }

    /// Phase at time `t`.
    pub fn phase(&self, t: f64) -> Phase {
        for s in &self.segments {
            if t < s.t1 {
                return s.phase;
            }
        }
        Phase::Complete
    }

    /// Required flight duration still ahead at time `t`, seconds.
    pub fn remaining(&self, t: f64) -> f64 {
        (self.total_duration - t).max(0.0)
    }
}

struct Builder {
    segments: Vec<Segment>,
    t: f64,
}

impl Builder {
    fn new() -> Self {
        Self {
            segments: Vec::new(),
            t: 0.0,
        }
    }

    fn push(&mut self, duration: f64, from: [f64; 3], to: [f64; 3], phase: Phase) {
        let t1 = self.t + duration;
        self.segments.push(Segment {
            t0: self.t,
            t1,
            from,
            to,
            phase,
        });
        self.t = t1;
    }

    fn finish(self) -> MissionPlan {
        MissionPlan {
            total_duration: self.t,
            segments: self.segments,
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<(), VehicleError> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(VehicleError::InvalidMission(format!(
            "{name} must be positive, got {v}"
        )));
    }
    Ok(())
}
