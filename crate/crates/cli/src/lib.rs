pub mod app;
pub mod bundle;
pub mod render;
pub mod schema;
