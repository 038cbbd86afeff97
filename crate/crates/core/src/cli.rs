//! `vtutor` command line: lipsync, calibrate, synth, serve, bench, stats.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error. With `--json`,
//! stdout carries only the JSON payload and diagnostics go to stderr.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::audio::{encode_wav, read_wav_file};
use crate::session::{LatencyReport, Orchestrator, TextSourceDescriptor, TextSourceKind};
use crate::stats::{read_ratings_csv, reproduce_table};
use crate::tts::{
    engine_from_descriptor, formant_calibration, synthesize, EngineKind, TtsEngineDescriptor,
    TtsRequest, VOWEL_SECONDS,
};
use crate::viseme::{
    calibrate, generate_timeline, CalibrationSet, Viseme, DEFAULT_SILENCE_RMS_THRESHOLD,
};
use crate::wire::{serve, ServerConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "vtutor",
    version,
    about = "Speech and lip-sync streams for embeddable tutoring agents"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Viseme timeline JSON for a WAV file.
    Lipsync {
        wav: PathBuf,
        /// Calibration JSON.
        #[arg(long)]
        cal: PathBuf,
        /// Write the timeline here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a calibration from A.wav, E.wav, I.wav, O.wav and U.wav.
    Calibrate {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SILENCE_RMS_THRESHOLD)]
        silence_threshold: f64,
    },
    /// Synthesize text to a 16 kHz WAV.
    Synth {
        text: String,
        /// Output path; `-` writes the WAV bytes to stdout.
        #[arg(long, default_value = "-")]
        out: PathBuf,
        #[command(flatten)]
        tts: TtsArgs,
    },
    /// Run the WebSocket server.
    Serve {
        #[arg(long, env = "VTUTOR_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Calibration JSON; defaults to one derived from the stub voice.
        #[arg(long)]
        calibration: Option<PathBuf>,
        #[command(flatten)]
        tts: TtsArgs,
        #[arg(long, default_value = "echo_stub")]
        text_source: TextSourceKind,
        /// Newline-separated replies for `--text-source scripted`.
        #[arg(long)]
        script: Option<PathBuf>,
        #[arg(long, env = "VTUTOR_LLM_ENDPOINT")]
        llm_endpoint: Option<String>,
        #[arg(long, env = "VTUTOR_LLM_TOKEN", hide_env_values = true)]
        llm_token: Option<String>,
        /// Directory with embed.js / demo.html overrides.
        #[arg(long)]
        assets: Option<PathBuf>,
    },
    /// Time from speak request to first event for one utterance.
    Bench {
        /// Utterance length in seconds.
        #[arg(long, default_value_t = 7.0)]
        duration: f64,
        #[command(flatten)]
        tts: TtsArgs,
        #[arg(long)]
        calibration: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long)]
        json: bool,
    },
    /// Table statistics from a ratings CSV.
    Stats {
        csv: PathBuf,
        /// Preference counts for agent A and agent B.
        #[arg(long, num_args = 2, value_names = ["A_COUNT", "B_COUNT"])]
        preference: Option<Vec<u64>>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Args)]
pub struct TtsArgs {
    #[arg(long = "tts", default_value = "formant_stub")]
    pub kind: EngineKind,
    /// Directory for `--tts fixture_dir`.
    #[arg(long)]
    pub fixture_dir: Option<PathBuf>,
    #[arg(long)]
    pub tts_endpoint: Option<String>,
}

impl TtsArgs {
    pub fn descriptor(&self) -> TtsEngineDescriptor {
        let desc = match self.kind {
            EngineKind::FormantStub => TtsEngineDescriptor::formant_stub(),
            EngineKind::FixtureDir => {
                TtsEngineDescriptor::fixture_dir(self.fixture_dir.clone().unwrap_or_default())
            }
            EngineKind::HttpService => TtsEngineDescriptor::http_service(
                self.tts_endpoint.clone().unwrap_or_default(),
                None,
            ),
        };
        desc.with_env_overrides()
            .with_overrides(self.tts_endpoint.clone(), None)
    }
}

/// Failure carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub exit_code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    fn usage(message: impl fmt::Display) -> Self {
        Self {
            exit_code: EXIT_USAGE,
            message: message.to_string(),
        }
    }

    fn data(message: impl fmt::Display) -> Self {
        Self {
            exit_code: EXIT_DATA,
            message: message.to_string(),
        }
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(cli.command, &mut std::io::stdout().lock()) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.exit_code
        }
    }
}

/// Runs one command, writing its payload to `stdout`.
pub fn execute(command: Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Lipsync { wav, cal, out } => {
            let cal = load_calibration(&cal)?;
            let clip = read_wav_file(&wav)
                .map_err(|e| CliError::data(format!("{}: {e}", wav.display())))?;
            let timeline = generate_timeline(&clip, &cal);
            emit(stdout, out.as_deref(), timeline.to_json().as_bytes())
        }
        Command::Calibrate {
            dir,
            out,
            silence_threshold,
        } => {
            let mut clips = BTreeMap::new();
            for v in Viseme::VOWELS {
                let path = dir.join(format!("{}.wav", v.label()));
                let clip = read_wav_file(&path)
                    .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
                clips.insert(v, clip);
            }
            let cal = calibrate(&clips, silence_threshold).map_err(CliError::data)?;
            emit(stdout, out.as_deref(), cal.to_json().as_bytes())
        }
        Command::Synth { text, out, tts } => {
            let clip =
                synthesize(&TtsRequest::new(text), &tts.descriptor()).map_err(CliError::data)?;
            let bytes = encode_wav(&clip);
            let out = (out != Path::new("-")).then_some(out);
            emit(stdout, out.as_deref(), &bytes)
        }
        Command::Serve {
            port,
            host,
            calibration,
            tts,
            text_source,
            script,
            llm_endpoint,
            llm_token,
            assets,
        } => {
            let cal = match calibration {
                Some(p) => load_calibration(&p)?,
                None => formant_calibration(),
            };
            let text_source = match text_source {
                TextSourceKind::EchoStub => TextSourceDescriptor::echo(),
                TextSourceKind::Scripted => {
                    let path = script
                        .ok_or_else(|| CliError::usage("--text-source scripted needs --script"))?;
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
                    TextSourceDescriptor::scripted(text.lines().filter(|l| !l.trim().is_empty()))
                }
                TextSourceKind::HttpLlm => TextSourceDescriptor::http_llm(
                    llm_endpoint.ok_or_else(|| {
                        CliError::usage("--text-source http_llm needs --llm-endpoint")
                    })?,
                    llm_token,
                ),
            };
            let config = ServerConfig {
                calibration: Arc::new(cal),
                tts: tts.descriptor(),
                text_source,
                assets_dir: assets,
            };
            let runtime = tokio::runtime::Runtime::new().map_err(CliError::data)?;
            runtime.block_on(async move {
                let handle = serve(SocketAddr::new(host, port), config)
                    .await
                    .map_err(CliError::data)?;
                eprintln!(
                    "listening on ws://{}/agent (demo at http://{}/demo)",
                    handle.local_addr(),
                    handle.local_addr()
                );
                handle.wait().await;
                Ok(())
            })
        }
        Command::Bench {
            duration,
            tts,
            calibration,
            runs,
            json,
        } => {
            if duration.is_nan() || duration <= 0.0 || runs == 0 {
                return Err(CliError::usage(
                    "--duration must be positive and --runs at least 1",
                ));
            }
            let cal = match calibration {
                Some(p) => load_calibration(&p)?,
                None => formant_calibration(),
            };
            let report = bench(duration, &tts.descriptor(), cal, runs)?;
            if json {
                writeln!(stdout, "{}", serde_json::to_string(&report).unwrap())
                    .map_err(CliError::data)?;
            } else {
                let mut text = String::new();
                for (i, r) in report.runs.iter().enumerate() {
                    text += &format!(
                        "run {}: first_event_latency_seconds = {:.4} (audio {:.2} s, {})\n",
                        i + 1,
                        r.first_event_latency_seconds,
                        r.audio_duration_seconds,
                        r.engine_kind
                    );
                }
                text += &format!(
                    "first_event_latency_seconds: {:.4}\n",
                    report.first_event_latency_seconds
                );
                stdout.write_all(text.as_bytes()).map_err(CliError::data)?;
            }
            Ok(())
        }
        Command::Stats {
            csv,
            preference,
            json,
        } => {
            let file = std::fs::File::open(&csv)
                .map_err(|e| CliError::data(format!("{}: {e}", csv.display())))?;
            let ratings = read_ratings_csv(file).map_err(CliError::data)?;
            let preference = preference.map(|p| (p[0], p[1]));
            let table = reproduce_table(&ratings, preference).map_err(CliError::data)?;
            let payload = if json {
                table.to_json() + "\n"
            } else {
                table.to_text()
            };
            stdout.write_all(payload.as_bytes()).map_err(CliError::data)
        }
    }
}

fn load_calibration(path: &Path) -> Result<CalibrationSet, CliError> {
    CalibrationSet::load(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn emit(stdout: &mut dyn Write, out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::data(format!("{}: {e}", path.display()))),
        None => {
            stdout.write_all(bytes).map_err(CliError::data)?;
            if bytes.first() == Some(&b'{') {
                stdout.write_all(b"\n").map_err(CliError::data)?;
            }
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub text: String,
    /// Worst run.
    pub first_event_latency_seconds: f64,
    pub runs: Vec<LatencyReport>,
}

/// Text whose stub rendering lasts `duration_seconds`: one vowel per 250 ms.
pub fn bench_text(duration_seconds: f64) -> String {
    let n = (duration_seconds / VOWEL_SECONDS).round().max(1.0) as usize;
    "aeiou".chars().cycle().take(n).collect()
}

/// Speaks [`bench_text`] `runs` times and reports each run's first-event latency.
pub fn bench(
    duration_seconds: f64,
    tts: &TtsEngineDescriptor,
    cal: CalibrationSet,
    runs: usize,
) -> Result<BenchReport, CliError> {
    let engine: Arc<dyn crate::tts::TtsEngine> =
        engine_from_descriptor(tts).map_err(CliError::data)?.into();
    let cal = Arc::new(cal);
    let orch = Orchestrator::new();
    let session = orch.open_session("bench", "");
    let text = bench_text(duration_seconds);
    let mut reports = Vec::with_capacity(runs);
    for _ in 0..runs {
        let stream = orch
            .speak(&session.session_id, &text, engine.clone(), cal.clone())
            .map_err(CliError::data)?;
        let (events, utterance) = stream.finish();
        match utterance {
            Some(u) => reports.push(u.report),
            None => {
                let msg = events
                    .iter()
                    .find_map(|e| match &e.event {
                        crate::session::AgentEvent::Error { code, message } => {
                            Some(format!("{code}: {message}"))
                        }
                        _ => None,
                    })
                    .unwrap_or_else(|| "utterance failed".into());
                return Err(CliError::data(msg));
            }
        }
    }
    Ok(BenchReport {
        text,
        first_event_latency_seconds: reports
            .iter()
            .map(|r| r.first_event_latency_seconds)
            .fold(0.0, f64::max),
        runs: reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bench_text_length() {
        assert_eq!(bench_text(7.0).len(), 28);
        assert_eq!(bench_text(0.01), "a");
    }

    #[test]
    fn usage_errors_exit_1() {
        assert_eq!(run(["vtutor", "dance"]), EXIT_USAGE);
        assert_eq!(run(["vtutor"]), EXIT_USAGE);
        assert_eq!(run(["vtutor", "bench", "--duration", "0"]), EXIT_USAGE);
        assert_eq!(run(["vtutor", "--help"]), EXIT_OK);
    }
}
