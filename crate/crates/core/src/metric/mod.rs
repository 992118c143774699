//! Rotationally symmetric Kähler model metrics and their radial geometry.

pub mod geodesic;
pub mod model;
pub mod profile;

pub use geodesic::{exp_map, geodesic_distance, geodesic_path, geodesic_samples, geodesic_trajectory};
pub use model::{builtin_model, ModelSpec, RadialKahlerModel};
pub use profile::{parse_profile_table, ProfileKind, RadialProfile, TableProfile};
