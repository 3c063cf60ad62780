//! Command-line front end and live front-panel server.

pub mod server;
