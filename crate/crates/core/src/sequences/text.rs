//! Line-oriented sequence format.
//!
//! ```text
//! # comment
//! repeats = 10
//! 1.6329931618554521e-5 | channel(target=all, offset_hz=3.5355e4, amp_hz=5e4, phase_rad=0e0)
//! 0 | rotate(target=0;2, axis=1e0:0e0:0e0, angle_rad=1.5707963267948966e0)
//! 5e-6 |
//! ```
//!
//! One segment per line; a segment with no items after the bar is free
//! evolution. Numbers are written in shortest round-trip form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use nalgebra::Vector3;

use super::{IdealRotation, PlaneTarget, PulseChannel, PulseSegment, PulseSequence};
use crate::error::{Error, Result};

fn target_text(t: &PlaneTarget) -> String {
    match t {
        PlaneTarget::All => "all".into(),
        PlaneTarget::Planes(set) => set
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(";"),
    }
}

pub fn write_sequence(seq: &PulseSequence) -> String {
    let mut out = format!("repeats = {}\n", seq.n_repeats);
    for s in &seq.segments {
        let _ = write!(out, "{:e} |", s.duration);
        if let Some(r) = &s.ideal_rotation {
            let _ = write!(
                out,
                " rotate(target={}, axis={:e}:{:e}:{:e}, angle_rad={:e})",
                target_text(&r.target),
                r.axis.x,
                r.axis.y,
                r.axis.z,
                r.angle
            );
        }
        for c in &s.channels {
            let _ = write!(
                out,
                " channel(target={}, offset_hz={:e}, amp_hz={:e}, phase_rad={:e})",
                target_text(&c.target),
                c.offset_hz,
                c.amplitude_hz,
                c.phase
            );
        }
        out.push('\n');
    }
    out
}

struct LineParser {
    line: usize,
}

impl LineParser {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    fn number(&self, s: &str) -> Result<f64> {
        s.trim()
            .parse()
            .map_err(|_| self.err(format!("bad number '{}'", s.trim())))
    }

    fn target(&self, s: &str) -> Result<PlaneTarget> {
        let s = s.trim();
        if s == "all" {
            return Ok(PlaneTarget::All);
        }
        let set = s
            .split(';')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| self.err(format!("bad plane '{p}'")))
            })
            .collect::<Result<BTreeSet<usize>>>()?;
        if set.is_empty() {
            return Err(self.err("empty target"));
        }
        Ok(PlaneTarget::Planes(set))
    }

    fn fields<'a>(&self, body: &'a str, keys: &[&str]) -> Result<BTreeMap<&'a str, &'a str>> {
        let mut map = BTreeMap::new();
        for kv in body.split(',') {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| self.err(format!("expected key=value, got '{kv}'")))?;
            let k = k.trim();
            if !keys.contains(&k) {
                return Err(self.err(format!("unknown key '{k}'")));
            }
            if map.insert(k, v.trim()).is_some() {
                return Err(self.err(format!("duplicate key '{k}'")));
            }
        }
        for k in keys {
            if !map.contains_key(k) {
                return Err(self.err(format!("missing key '{k}'")));
            }
        }
        Ok(map)
    }

    /// Splits `name(body) name(body) …` into pairs.
    fn items<'a>(&self, mut rest: &'a str) -> Result<Vec<(&'a str, &'a str)>> {
        let mut items = Vec::new();
        loop {
            rest = rest.trim_start();
            if rest.is_empty() {
                return Ok(items);
            }
            let open = rest.find('(').ok_or_else(|| self.err("expected '('"))?;
            let close = rest.find(')').ok_or_else(|| self.err("expected ')'"))?;
            if close < open {
                return Err(self.err("unbalanced parentheses"));
            }
            items.push((rest[..open].trim(), &rest[open + 1..close]));
            rest = &rest[close + 1..];
        }
    }

    fn segment(&self, text: &str) -> Result<PulseSegment> {
        let (dur, rest) = text
            .split_once('|')
            .ok_or_else(|| self.err("expected 'duration | …'"))?;
        let mut seg = PulseSegment::free(self.number(dur)?);
        for (name, body) in self.items(rest)? {
            match name {
                "channel" => {
                    let f = self.fields(body, &["target", "offset_hz", "amp_hz", "phase_rad"])?;
                    seg.channels.push(PulseChannel {
                        target: self.target(f["target"])?,
                        offset_hz: self.number(f["offset_hz"])?,
                        amplitude_hz: self.number(f["amp_hz"])?,
                        phase: self.number(f["phase_rad"])?,
                    });
                }
                "rotate" => {
                    if seg.ideal_rotation.is_some() {
                        return Err(self.err("more than one rotate item"));
                    }
                    let f = self.fields(body, &["target", "axis", "angle_rad"])?;
                    let axis: Vec<f64> = f["axis"]
                        .split(':')
                        .map(|x| self.number(x))
                        .collect::<Result<_>>()?;
                    let [x, y, z] = axis[..] else {
                        return Err(self.err("axis needs three components x:y:z"));
                    };
                    let (target, axis, angle) = (
                        self.target(f["target"])?,
                        Vector3::new(x, y, z),
                        self.number(f["angle_rad"])?,
                    );
                    // written axes are already unit; keep their bits exactly
                    let rot = if (axis.norm() - 1.0).abs() < 1e-12 && angle.is_finite() {
                        IdealRotation {
                            target,
                            axis,
                            angle,
                        }
                    } else {
                        IdealRotation::new(target, axis, angle)
                            .map_err(|e| self.err(e.to_string()))?
                    };
                    seg.ideal_rotation = Some(rot);
                }
                other => return Err(self.err(format!("unknown item '{other}'"))),
            }
        }
        Ok(seg)
    }
}

pub fn parse_sequence(text: &str) -> Result<PulseSequence> {
    let mut repeats = None;
    let mut segments = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let p = LineParser { line: k + 1 };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(v) = line.strip_prefix("repeats") {
            let v = v
                .trim_start()
                .strip_prefix('=')
                .ok_or_else(|| p.err("expected 'repeats = N'"))?;
            if repeats.is_some() {
                return Err(p.err("duplicate repeats line"));
            }
            repeats = Some(
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| p.err("repeats must be a nonnegative integer"))?,
            );
            continue;
        }
        segments.push(p.segment(line)?);
    }
    PulseSequence::new(segments, repeats.unwrap_or(1))
}
