use std::io::Write;
use std::process::ExitCode;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Error,
}

/// What every command returns; the exit code is 0 iff `status` is ok.
#[derive(Debug, Clone, Serialize)]
pub struct CommandResult {
    pub status: Status,
    pub payload: Value,
    pub diagnostics: Vec<String>,
    #[serde(skip)]
    human: String,
}

impl CommandResult {
    pub fn ok(payload: Value, human: impl Into<String>) -> Self {
        CommandResult {
            status: Status::Ok,
            payload,
            diagnostics: Vec::new(),
            human: human.into(),
        }
    }

    pub fn failure(err: impl std::fmt::Display) -> Self {
        CommandResult {
            status: Status::Error,
            payload: Value::Null,
            diagnostics: vec![err.to_string()],
            human: String::new(),
        }
    }

    pub fn with_payload(mut self, payload: Value) -> Self {
        self.payload = payload;
        self
    }

    pub fn with_diagnostics(mut self, diagnostics: Vec<String>) -> Self {
        self.diagnostics.extend(diagnostics);
        self
    }

    /// Keeps the payload but marks the run as failed.
    pub fn into_error(mut self, reason: impl Into<String>) -> Self {
        self.status = Status::Error;
        self.diagnostics.insert(0, reason.into());
        self
    }

    /// Write failures such as a closed pipe are ignored.
    pub fn print(&self, json: bool) {
        let mut out = std::io::stdout().lock();
        if json {
            let text = serde_json::to_string_pretty(self).expect("results serialise");
            let _ = writeln!(out, "{text}");
            return;
        }
        if !self.human.is_empty() {
            let _ = writeln!(out, "{}", self.human);
        }
        let mut err = std::io::stderr().lock();
        let label = match self.status {
            Status::Ok => "note",
            Status::Error => "error",
        };
        for d in &self.diagnostics {
            let _ = writeln!(err, "{label}: {d}");
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self.status {
            Status::Ok => ExitCode::SUCCESS,
            Status::Error => ExitCode::FAILURE,
        }
    }
}
