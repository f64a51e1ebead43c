//! Writes a small synthetic dataset for trying the CLI:
//!
//! ```text
//! cargo run --example desk_dataset -- /tmp/desk
//! ```
//!
//! produces `gallery/` captures listed in `enroll.csv`, held-out `probes/`
//! listed in `probes.csv`, and a few posed captures under `posed/`.

use std::fs;
use std::path::PathBuf;

use clap::Parser;
use facekit::synth::{write_capture, CaptureParams, Subject};

#[derive(Parser)]
struct Args {
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    subjects: u64,
    /// Enrolled captures per subject.
    #[arg(long, default_value_t = 2)]
    captures: u64,
    /// Probe captures per subject.
    #[arg(long, default_value_t = 2)]
    probes: u64,
}

fn main() -> std::io::Result<()> {
    let args = Args::parse();
    let dirs = ["gallery", "probes", "posed"].map(|d| args.out.join(d));
    for d in &dirs {
        fs::create_dir_all(d)?;
    }
    let mut enroll = String::from("image,landmarks,subject\n");
    let mut probes = String::from("image,landmarks,subject\n");
    let rel = |p: &std::path::Path| p.strip_prefix(&args.out).unwrap().display().to_string();

    for s in 0..args.subjects {
        let subject = Subject::new(s);
        let id = format!("s{s:02}");
        for c in 0..args.captures + args.probes {
            let params = CaptureParams::random(s * 1000 + c);
            let (dir, list) = if c < args.captures {
                (&dirs[0], &mut enroll)
            } else {
                (&dirs[1], &mut probes)
            };
            let w = write_capture(dir, &format!("{id}_c{c}"), &id, &subject, &params)?;
            list.push_str(&format!("{},{},{id}\n", rel(&w.image), rel(&w.landmarks)));
        }
        for (name, yaw, pitch) in [
            ("left", -40.0, 0.0),
            ("right", 40.0, 0.0),
            ("up", 0.0, 35.0),
            ("down", 0.0, -35.0),
        ] {
            let params = CaptureParams::random(s * 1000 + 500).with_pose(yaw, pitch);
            write_capture(&dirs[2], &format!("{id}_{name}"), &id, &subject, &params)?;
        }
    }
    fs::write(args.out.join("enroll.csv"), enroll)?;
    fs::write(args.out.join("probes.csv"), probes)?;
    println!("wrote {} subjects to {}", args.subjects, args.out.display());
    Ok(())
}
