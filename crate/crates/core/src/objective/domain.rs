use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use super::ObjectiveError;
use crate::camera::CameraPose;
use crate::math::Vec3;

/// One scalar of a camera block: free within bounds, or pinned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slot {
    Free { lo: f64, hi: f64 },
    Fixed(f64),
}

impl Slot {
    pub fn free(lo: f64, hi: f64) -> Self {
        Slot::Free { lo, hi }
    }

    pub fn is_free(&self) -> bool {
        matches!(self, Slot::Free { .. })
    }
}

/// Where a camera sits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement {
    /// Position `(x, y, z)`.
    Point([Slot; 3]),
    /// Position `start + t·(end − start)` for the scalar `t`.
    Line { start: Vec3, end: Vec3, t: Slot },
}

/// Where a camera looks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Aim {
    /// Pan and tilt in radians.
    PanTilt([Slot; 2]),
    /// Optical axis through a fixed point.
    Target(Vec3),
}

/// Parametrization of one camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub placement: Placement,
    pub aim: Aim,
}

impl Block {
    /// Free position and free pan/tilt.
    pub fn full(bounds: [(f64, f64); 5]) -> Self {
        let s = bounds.map(|(lo, hi)| Slot::free(lo, hi));
        Block {
            placement: Placement::Point([s[0], s[1], s[2]]),
            aim: Aim::PanTilt([s[3], s[4]]),
        }
    }

    /// Free position, looking at a fixed target.
    pub fn position_lookat(bounds: [(f64, f64); 3], target: Vec3) -> Self {
        Block {
            placement: Placement::Point(bounds.map(|(lo, hi)| Slot::free(lo, hi))),
            aim: Aim::Target(target),
        }
    }

    /// Position along a segment with fixed pan/tilt.
    pub fn line(start: Vec3, end: Vec3, t: (f64, f64), pan: f64, tilt: f64) -> Self {
        Block {
            placement: Placement::Line {
                start,
                end,
                t: Slot::free(t.0, t.1),
            },
            aim: Aim::PanTilt([Slot::Fixed(pan), Slot::Fixed(tilt)]),
        }
    }

    /// Fixed pose given by position and pan/tilt.
    pub fn fixed(position: Vec3, pan: f64, tilt: f64) -> Self {
        Block {
            placement: Placement::Point([
                Slot::Fixed(position.x),
                Slot::Fixed(position.y),
                Slot::Fixed(position.z),
            ]),
            aim: Aim::PanTilt([Slot::Fixed(pan), Slot::Fixed(tilt)]),
        }
    }

    fn slots(&self) -> Vec<(&'static str, Slot)> {
        let mut out = Vec::with_capacity(5);
        match self.placement {
            Placement::Point(s) => {
                out.extend([("x", s[0]), ("y", s[1]), ("z", s[2])]);
            }
            Placement::Line { t, .. } => out.push(("t", t)),
        }
        if let Aim::PanTilt(s) = self.aim {
            out.extend([("pan", s[0]), ("tilt", s[1])]);
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.slots().iter().filter(|(_, s)| s.is_free()).count()
    }
}

/// Product of per-camera blocks; the variable vector concatenates the free
/// scalars of every block in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    blocks: Vec<Block>,
}

impl Domain {
    pub fn new(blocks: Vec<Block>) -> Result<Self, ObjectiveError> {
        let d = Domain { blocks };
        for (c, b) in d.blocks.iter().enumerate() {
            for (name, slot) in b.slots() {
                let ok = match slot {
                    Slot::Free { lo, hi } => lo.is_finite() && hi.is_finite() && lo <= hi,
                    Slot::Fixed(v) => v.is_finite(),
                };
                if !ok {
                    let (lo, hi) = match slot {
                        Slot::Free { lo, hi } => (lo, hi),
                        Slot::Fixed(v) => (v, v),
                    };
                    return Err(ObjectiveError::InvalidBounds {
                        name: scalar_name(c, name),
                        lo,
                        hi,
                    });
                }
            }
            if let Placement::Line { start, end, .. } = b.placement {
                if !(start.is_finite() && end.is_finite()) || start == end {
                    return Err(ObjectiveError::DegenerateLine { camera: c + 1 });
                }
            }
        }
        Ok(d)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn cameras(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(Block::dim).sum()
    }

    /// Bounds of each free scalar in vector order.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.free_slots().map(|(_, lo, hi)| (lo, hi)).collect()
    }

    /// Names of the free scalars, e.g. `cam2.pan`.
    pub fn names(&self) -> Vec<String> {
        self.free_slots().map(|(n, _, _)| n).collect()
    }

    fn free_slots(&self) -> impl Iterator<Item = (String, f64, f64)> + '_ {
        self.blocks.iter().enumerate().flat_map(|(c, b)| {
            b.slots().into_iter().filter_map(move |(name, s)| match s {
                Slot::Free { lo, hi } => Some((scalar_name(c, name), lo, hi)),
                Slot::Fixed(_) => None,
            })
        })
    }

    /// Domain with one more camera block appended.
    pub fn with_block(&self, block: Block) -> Result<Self, ObjectiveError> {
        let mut blocks = self.blocks.clone();
        blocks.push(block);
        Domain::new(blocks)
    }

    /// Checks the vector's length and bounds.
    pub fn check(&self, x: &[f64]) -> Result<(), ObjectiveError> {
        if x.len() != self.dim() {
            return Err(ObjectiveError::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        for ((name, lo, hi), &v) in self.free_slots().zip(x) {
            if !(v >= lo && v <= hi) {
                return Err(ObjectiveError::OutOfBounds {
                    name,
                    value: v,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }

    pub fn poses_from_vector(&self, x: &[f64]) -> Result<Vec<CameraPose>, ObjectiveError> {
        self.check(x)?;
        let mut it = x.iter().copied();
        let mut take = |s: Slot| match s {
            Slot::Free { .. } => it.next().expect("length checked"),
            Slot::Fixed(v) => v,
        };
        let mut poses = Vec::with_capacity(self.blocks.len());
        for (c, b) in self.blocks.iter().enumerate() {
            let position = match b.placement {
                Placement::Point(s) => Vec3::new(take(s[0]), take(s[1]), take(s[2])),
                Placement::Line { start, end, t } => start + (end - start) * take(t),
            };
            let pose = match b.aim {
                Aim::PanTilt(s) => {
                    let pan = take(s[0]);
                    let tilt = take(s[1]);
                    CameraPose::from_pan_tilt(position, pan, tilt)
                }
                Aim::Target(target) => CameraPose::aimed_at(position, target),
            };
            poses.push(pose.map_err(|source| ObjectiveError::Camera { camera: c + 1, source })?);
        }
        Ok(poses)
    }

    /// Inverse of [`Domain::poses_from_vector`] for roll-free poses. Pan is
    /// shifted by whole turns into its bounds where possible; line positions
    /// are projected onto the line.
    pub fn vector_from_poses(&self, poses: &[CameraPose]) -> Result<Vec<f64>, ObjectiveError> {
        if poses.len() != self.blocks.len() {
            return Err(ObjectiveError::Dimension {
                expected: self.blocks.len(),
                got: poses.len(),
            });
        }
        let mut x = Vec::with_capacity(self.dim());
        for (b, pose) in self.blocks.iter().zip(poses) {
            let p = pose.position();
            let mut push = |s: Slot, v: f64| {
                if s.is_free() {
                    x.push(v);
                }
            };
            match b.placement {
                Placement::Point(s) => {
                    push(s[0], p.x);
                    push(s[1], p.y);
                    push(s[2], p.z);
                }
                Placement::Line { start, end, t } => {
                    let d = end - start;
                    push(t, (p - start).dot(d) / d.norm_squared());
                }
            }
            if let Aim::PanTilt(s) = b.aim {
                let (mut pan, tilt) = pose.pan_tilt();
                if let Slot::Free { lo, hi } = s[0] {
                    while pan > hi && pan - TAU >= lo - 1e-12 {
                        pan -= TAU;
                    }
                    while pan < lo && pan + TAU <= hi + 1e-12 {
                        pan += TAU;
                    }
                }
                push(s[0], pan);
                push(s[1], tilt);
            }
        }
        Ok(x)
    }

    /// Clamps each component of `x` into its bounds.
    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (lo, hi)) in x.iter_mut().zip(self.bounds()) {
            *v = v.clamp(lo, hi);
        }
    }
}

fn scalar_name(camera: usize, name: &str) -> String {
    format!("cam{}.{}", camera + 1, name)
}
