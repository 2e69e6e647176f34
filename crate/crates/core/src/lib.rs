//! Multi-camera visibility simulation and camera placement optimization.
//!
//! The crate is `no_std` + `alloc` when built without the `std` feature.
//! Enable `parallel` to render and color voxels with rayon.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod camera;
pub mod clock;
pub mod geometry;
pub mod math;
pub mod objective;
pub mod render;
pub mod solvers;
pub mod voxel;

pub use camera::{CameraError, CameraIntrinsics, CameraPose, Projection, View};
pub use geometry::{DynamicObject, Environment, GeometryError, Triangle, TriangleMesh};
pub use math::{Aabb, Quat, RigidTransform, Vec3};
pub use render::{render_depth, segment, DepthImage, SegmentedImage};
pub use voxel::{AttributeField, FieldMode, LabelSet, MultiView, SampleMode, VoxelGrid};
