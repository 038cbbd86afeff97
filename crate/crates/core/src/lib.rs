pub mod audio;
pub mod cli;
pub mod session;
pub mod stats;
pub mod tts;
pub mod viseme;
pub mod wire;
