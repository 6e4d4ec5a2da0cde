pub mod config;
pub mod geom;
pub mod gesture;
pub mod keywords;
pub mod mapping;
pub mod marker;
pub mod protocol;
pub mod scene;
pub mod transcript;
