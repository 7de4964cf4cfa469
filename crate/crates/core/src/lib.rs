pub mod behaviors;
pub mod belief;
pub mod collision;
pub mod domain;
pub mod executor;
pub mod geometry;
pub mod grasp;
pub mod grounding;
pub mod kinematics;
pub mod motion;
pub mod planner;
pub mod scenario;
pub mod trace;
pub mod world;
