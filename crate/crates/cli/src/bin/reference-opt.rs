// SPDX-License-Identifier: Apache-2.0

//! Stand-alone front end to the built-in reference target, usable wherever
//! an opt-style executable is expected: `reference-opt [--pass[=opt]]... FILE`.

use std::process::ExitCode;

use graftfuzz_core::reference::ReferenceTarget;

fn main() -> ExitCode {
    let target = match ReferenceTarget::from_env() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("reference-opt: {e}");
            return ExitCode::from(2);
        }
    };
    let args: Vec<String> = std::env::args().skip(1).collect();
    let code = target.run_cli(&args, &mut std::io::stderr());
    ExitCode::from(code.clamp(0, 255) as u8)
}
