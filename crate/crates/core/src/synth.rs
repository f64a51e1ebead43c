//! Synthetic subjects for demos and tests.
//!
//! A subject is a seeded procedural face texture laid over a canonical 3D
//! landmark template. Each capture perturbs head position, depth, pose,
//! illumination (gain, offset, horizontal gradient) and sensor noise, then
//! renders a grayscale image and the matching 21-point landmark set.
//!
//! Coordinates: camera X to the image right, Y up, Z away from the sensor.
//! "Left"/"right" point names follow the image sides, so every `right_of_*`
//! point lies at larger pixel x than its `left_of_*` partner.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::GrayImage;
use crate::landmarks::{FacePointId as Pt, Landmark, LandmarkSet};

pub const IMAGE_WIDTH: usize = 176;
pub const IMAGE_HEIGHT: usize = 224;
const FOCAL: f64 = 800.0;
const HEAD_DEPTH: f64 = 0.9;

/// Head-frame template in meters, indexed by [`Pt::index`]. The forehead and
/// chin share a depth, as do the two cheeks, so the frontal pose is exactly
/// zero pitch, yaw and roll.
pub fn template() -> [[f64; 3]; 21] {
    let mut t = [[0.0; 3]; 21];
    let mut set = |p: Pt, x: f64, y: f64, z: f64| t[p.index()] = [x, y, z];
    set(Pt::MidTopLeftEyebrow, -0.032, 0.035, -0.095);
    set(Pt::UnderMidBottomLeftEyelid, -0.032, 0.008, -0.092);
    set(Pt::RightOfLeftEyebrow, -0.012, 0.031, -0.096);
    set(Pt::LeftOfLeftEyebrow, -0.052, 0.029, -0.086);
    set(Pt::MidTopRightEyebrow, 0.032, 0.035, -0.095);
    set(Pt::UnderMidBottomRightEyelid, 0.032, 0.008, -0.092);
    set(Pt::RightOfRightEyebrow, 0.052, 0.029, -0.086);
    set(Pt::LeftOfRightEyebrow, 0.012, 0.031, -0.096);
    set(Pt::NoseTip, 0.0, -0.016, -0.118);
    set(Pt::MidpointBetweenEyebrows, 0.0, 0.032, -0.098);
    set(Pt::LeftCornerMouth, -0.018, -0.046, -0.094);
    set(Pt::RightCornerMouth, 0.018, -0.046, -0.094);
    set(Pt::OutsideLeftCornerMouth, -0.026, -0.046, -0.091);
    set(Pt::OutsideRightCornerMouth, 0.026, -0.046, -0.091);
    set(Pt::TopDipUpperLip, 0.0, -0.036, -0.099);
    set(Pt::BottomChin, 0.0, -0.085, -0.095);
    set(Pt::TopSkull, 0.0, 0.1, -0.06);
    set(Pt::TopRightForehead, 0.04, 0.078, -0.088);
    set(Pt::MiddleForehead, 0.0, 0.07, -0.095);
    set(Pt::MidRightCheek, 0.05, -0.016, -0.082);
    set(Pt::MidLeftCheek, -0.05, -0.016, -0.082);
    t
}

/// Rotates head-frame points by `pitch` about X, then `yaw` about Y
/// (degrees). Positive yaw pushes the right cheek away from the sensor,
/// positive pitch pushes the forehead away.
pub fn rotate(points: &[[f64; 3]; 21], yaw_deg: f64, pitch_deg: f64) -> [[f64; 3]; 21] {
    let (sy, cy) = yaw_deg.to_radians().sin_cos();
    let (sp, cp) = pitch_deg.to_radians().sin_cos();
    points
        .map(|[x, y, z]| {
            let (y1, z1) = (y * cp - z * sp, y * sp + z * cp);
            (x * cy - z1 * sy, y1, x * sy + z1 * cy)
        })
        .map(|(x, y, z)| [x, y, z])
}

/// Places head-frame points at `center` in camera space and projects them.
pub fn project(
    points: &[[f64; 3]; 21],
    center: [f64; 3],
    image_ref: &str,
    width: usize,
    height: usize,
) -> LandmarkSet {
    let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
    let lms = points.map(|[x, y, z]| {
        let (x, y, z) = (x + center[0], y + center[1], z + center[2]);
        Landmark {
            px: cx + FOCAL * x / z,
            py: cy - FOCAL * y / z,
            x,
            y,
            z,
        }
    });
    LandmarkSet::new(image_ref, width as u32, height as u32, lms)
}

/// Camera-space head center that keeps the face surface near the optical
/// axis when the head turns.
fn head_center(yaw_deg: f64, pitch_deg: f64, shift: [f64; 3]) -> [f64; 3] {
    [
        shift[0] - 0.09 * yaw_deg.to_radians().sin(),
        shift[1] - 0.09 * pitch_deg.to_radians().sin(),
        HEAD_DEPTH + shift[2],
    ]
}

/// Template landmarks at a given pose, centered in a default-size image.
pub fn posed_landmarks(yaw_deg: f64, pitch_deg: f64) -> LandmarkSet {
    project(
        &rotate(&template(), yaw_deg, pitch_deg),
        head_center(yaw_deg, pitch_deg, [0.0; 3]),
        "synthetic",
        IMAGE_WIDTH,
        IMAGE_HEIGHT,
    )
}

struct Wave {
    amp: f64,
    kx: f64,
    ky: f64,
    phase: f64,
}

struct Blob {
    x: f64,
    y: f64,
    rx: f64,
    ry: f64,
    depth: f64,
}

/// Identity-specific appearance, fixed by the subject seed.
pub struct Subject {
    skin: f64,
    waves: Vec<Wave>,
    blobs: Vec<Blob>,
}

impl Subject {
    pub fn new(seed: u64) -> Subject {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ 0x5eed);
        let waves = (0..14)
            .map(|_| {
                // Wavelengths between 8 and 30 mm.
                let wavelength = rng.gen_range(0.008..0.03);
                let theta = rng.gen_range(0.0..PI);
                let k = 2.0 * PI / wavelength;
                Wave {
                    amp: rng.gen_range(5.0..16.0),
                    kx: k * theta.cos(),
                    ky: k * theta.sin(),
                    phase: rng.gen_range(0.0..2.0 * PI),
                }
            })
            .collect();
        let t = template();
        let jit = |rng: &mut ChaCha8Rng, s: f64| rng.gen_range(-s..s);
        let mut blobs = Vec::new();
        let eye_rx = rng.gen_range(0.008..0.014);
        let eye_ry = rng.gen_range(0.004..0.008);
        let eye_depth = rng.gen_range(40.0..90.0);
        for lid in [Pt::UnderMidBottomLeftEyelid, Pt::UnderMidBottomRightEyelid] {
            let p = t[lid.index()];
            blobs.push(Blob {
                x: p[0],
                y: p[1] + 0.008,
                rx: eye_rx,
                ry: eye_ry,
                depth: eye_depth,
            });
        }
        let brow_depth = rng.gen_range(20.0..70.0);
        let brow_ry = rng.gen_range(0.002..0.005);
        for brow in [Pt::MidTopLeftEyebrow, Pt::MidTopRightEyebrow] {
            let p = t[brow.index()];
            blobs.push(Blob {
                x: p[0],
                y: p[1] - 0.004,
                rx: 0.02,
                ry: brow_ry,
                depth: brow_depth,
            });
        }
        let mouth = t[Pt::LeftCornerMouth.index()];
        blobs.push(Blob {
            x: 0.0,
            y: mouth[1],
            rx: rng.gen_range(0.014..0.024),
            ry: rng.gen_range(0.003..0.007),
            depth: rng.gen_range(30.0..80.0),
        });
        // Moles, freckles and similar marks.
        for _ in 0..rng.gen_range(3..7) {
            let r = rng.gen_range(0.003..0.008);
            blobs.push(Blob {
                x: jit(&mut rng, 0.05),
                y: rng.gen_range(-0.08..0.08),
                rx: r,
                ry: r,
                depth: rng.gen_range(-40.0..50.0),
            });
        }
        Subject {
            skin: rng.gen_range(110.0..160.0),
            waves,
            blobs,
        }
    }

    /// Face intensity at head-frame position `(u, v)` in meters.
    fn shade(&self, u: f64, v: f64) -> f64 {
        let mut value = self.skin;
        for w in &self.waves {
            value += w.amp * (w.kx * u + w.ky * v + w.phase).sin();
        }
        for b in &self.blobs {
            let d = ((u - b.x) / b.rx).powi(2) + ((v - b.y) / b.ry).powi(2);
            value -= b.depth * (-d).exp();
        }
        value
    }
}

/// Per-capture nuisance parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptureParams {
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub shift: [f64; 3],
    pub gain: f64,
    pub offset: f64,
    /// Intensity change across the image width.
    pub gradient: f64,
    pub noise: f64,
    pub seed: u64,
}

impl CaptureParams {
    /// Random nuisance for a frontal capture.
    pub fn random(seed: u64) -> CaptureParams {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0ff_ee00);
        CaptureParams {
            yaw_deg: rng.gen_range(-6.0..6.0),
            pitch_deg: rng.gen_range(-6.0..6.0),
            shift: [
                rng.gen_range(-0.004..0.004),
                rng.gen_range(-0.004..0.004),
                rng.gen_range(-0.03..0.03),
            ],
            gain: rng.gen_range(0.75..1.25),
            offset: rng.gen_range(-20.0..20.0),
            gradient: rng.gen_range(-25.0..25.0),
            noise: 2.0,
            seed,
        }
    }

    pub fn with_pose(mut self, yaw_deg: f64, pitch_deg: f64) -> CaptureParams {
        self.yaw_deg = yaw_deg;
        self.pitch_deg = pitch_deg;
        self
    }
}

/// Renders one capture of `subject`.
pub fn render(
    subject: &Subject,
    params: &CaptureParams,
    image_ref: &str,
) -> (GrayImage, LandmarkSet) {
    let center = head_center(params.yaw_deg, params.pitch_deg, params.shift);
    let posed = rotate(&template(), params.yaw_deg, params.pitch_deg);
    let ls = project(&posed, center, image_ref, IMAGE_WIDTH, IMAGE_HEIGHT);

    let (sy, cy) = params.yaw_deg.to_radians().sin_cos();
    let (sp, cp) = params.pitch_deg.to_radians().sin_cos();
    // Depth of the face surface, used to back-project pixels.
    let plane = center[2] - 0.09;
    let (icx, icy) = (IMAGE_WIDTH as f64 / 2.0, IMAGE_HEIGHT as f64 / 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ 0xbad_5eed);
    let background = 60.0 + 40.0 * ((params.seed % 7) as f64 / 7.0);

    let img = GrayImage::from_fn(IMAGE_WIDTH, IMAGE_HEIGHT, |x, y| {
        let cam_x = (x as f64 - icx) * plane / FOCAL - center[0];
        let cam_y = -(y as f64 - icy) * plane / FOCAL - center[1];
        // Foreshortening of a rotated plane.
        let u = (cam_x - 0.09 * sy) / cy.max(0.2);
        let v = (cam_y - 0.09 * sp) / cp.max(0.2);
        let inside = (u / 0.075).powi(2) + ((v - 0.005) / 0.105).powi(2) <= 1.0;
        let base = if inside {
            subject.shade(u, v)
        } else {
            background + 10.0 * ((x / 8 + y / 8) % 2) as f64
        };
        let lit = params.gain * base
            + params.offset
            + params.gradient * (x as f64 / IMAGE_WIDTH as f64 - 0.5);
        let noisy = lit
            + params.noise * (rng.gen::<f64>() + rng.gen::<f64>() + rng.gen::<f64>() - 1.5) * 2.0;
        noisy.round().clamp(0.0, 255.0) as u8
    });
    (img, ls)
}

/// Paths of one capture written to disk.
#[derive(Debug, Clone)]
pub struct WrittenCapture {
    pub subject_id: String,
    pub image: PathBuf,
    pub landmarks: PathBuf,
}

/// Renders and writes `<dir>/<name>.png` and `<dir>/<name>.json`.
pub fn write_capture(
    dir: &Path,
    name: &str,
    subject_id: &str,
    subject: &Subject,
    params: &CaptureParams,
) -> std::io::Result<WrittenCapture> {
    let image = dir.join(format!("{name}.png"));
    let landmarks = dir.join(format!("{name}.json"));
    let image_name = image.file_name().unwrap().to_string_lossy().into_owned();
    let (img, ls) = render(subject, params, &image_name);
    img.save_png(&image)
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    std::fs::write(&landmarks, ls.to_json())?;
    Ok(WrittenCapture {
        subject_id: subject_id.to_string(),
        image,
        landmarks,
    })
}
