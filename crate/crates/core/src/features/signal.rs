//! Stereo sample buffers and lossless audio decoding.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result, Warning};

pub const MIN_SAMPLE_RATE: u32 = 8000;

/// Two equally long channels of samples nominally in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct StereoSignal {
    left: Vec<f32>,
    right: Vec<f32>,
    sample_rate: u32,
}

impl StereoSignal {
    pub fn new(left: Vec<f32>, right: Vec<f32>, sample_rate: u32) -> Result<Self> {
        if left.len() != right.len() {
            return Err(Error::InvalidInput(format!(
                "channel lengths differ: {} vs {}",
                left.len(),
                right.len()
            )));
        }
        if sample_rate < MIN_SAMPLE_RATE {
            return Err(Error::InvalidInput(format!(
                "sample rate {sample_rate} Hz below {MIN_SAMPLE_RATE} Hz"
            )));
        }
        Ok(Self {
            left,
            right,
            sample_rate,
        })
    }

    /// Duplicates a mono channel to both sides.
    pub fn from_mono(samples: Vec<f32>, sample_rate: u32) -> Result<Self> {
        Self::new(samples.clone(), samples, sample_rate)
    }

    pub fn left(&self) -> &[f32] {
        &self.left
    }

    pub fn right(&self) -> &[f32] {
        &self.right
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.len() as f64 / f64::from(self.sample_rate)
    }

    /// Mid channel `(L + R) / 2`.
    pub fn mono(&self) -> Vec<f32> {
        self.left
            .iter()
            .zip(&self.right)
            .map(|(l, r)| 0.5 * (l + r))
            .collect()
    }
}

/// Decoded audio plus any non-fatal conditions met while decoding.
#[derive(Debug, Clone)]
pub struct Decoded {
    pub signal: StereoSignal,
    pub warnings: Vec<Warning>,
}

/// Decodes a RIFF WAVE (integer PCM or 32-bit float) or FLAC file.
/// The container is identified by its magic bytes, not the extension.
pub fn decode_audio(path: &Path) -> Result<Decoded> {
    let mut magic = [0u8; 4];
    {
        let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
        if f.read_exact(&mut magic).is_err() {
            return Err(corrupt(path, "file shorter than a header"));
        }
    }
    let (channels, sample_rate) = match &magic {
        b"RIFF" => decode_wav(path)?,
        b"fLaC" => decode_flac(path)?,
        _ => {
            return Err(Error::UnsupportedFormat(format!(
                "{}: not a WAVE or FLAC file",
                path.display()
            )))
        }
    };
    let mut warnings = Vec::new();
    let mut it = channels.into_iter();
    let signal = match (it.next(), it.next()) {
        (Some(mono), None) => {
            warnings.push(Warning::new(
                "MonoInput",
                format!("{}: mono file duplicated to both channels", path.display()),
            ));
            StereoSignal::from_mono(mono, sample_rate)?
        }
        (Some(l), Some(r)) => StereoSignal::new(l, r, sample_rate)?,
        _ => return Err(corrupt(path, "no channels")),
    };
    Ok(Decoded { signal, warnings })
}

fn corrupt(path: &Path, detail: impl Into<String>) -> Error {
    Error::CorruptFile {
        path: path.to_path_buf(),
        detail: detail.into(),
    }
}

fn check_channels(path: &Path, channels: usize) -> Result<()> {
    match channels {
        1 | 2 => Ok(()),
        n => Err(Error::UnsupportedFormat(format!(
            "{}: {n} channels (only mono and stereo)",
            path.display()
        ))),
    }
}

fn deinterleave(
    path: &Path,
    channels: usize,
    samples: impl Iterator<Item = Result<f32>>,
) -> Result<Vec<Vec<f32>>> {
    let mut out = vec![Vec::new(); channels];
    for (i, s) in samples.enumerate() {
        out[i % channels].push(s?);
    }
    if out[0].len() != out[channels - 1].len() {
        return Err(corrupt(path, "incomplete final sample frame"));
    }
    Ok(out)
}

fn decode_wav(path: &Path) -> Result<(Vec<Vec<f32>>, u32)> {
    let map_err = |e: hound::Error| match e {
        hound::Error::Unsupported => {
            Error::UnsupportedFormat(format!("{}: unsupported WAVE encoding", path.display()))
        }
        other => corrupt(path, other.to_string()),
    };
    let reader = hound::WavReader::open(path).map_err(map_err)?;
    let spec = reader.spec();
    let channels = usize::from(spec.channels);
    check_channels(path, channels)?;
    let expected = reader.len() as usize;
    let data = match spec.sample_format {
        hound::SampleFormat::Float => {
            if spec.bits_per_sample != 32 {
                return Err(Error::UnsupportedFormat(format!(
                    "{}: {}-bit float",
                    path.display(),
                    spec.bits_per_sample
                )));
            }
            deinterleave(
                path,
                channels,
                reader.into_samples::<f32>().map(|s| s.map_err(map_err)),
            )?
        }
        hound::SampleFormat::Int => {
            let scale = 1.0 / (1u64 << (spec.bits_per_sample - 1)) as f32;
            deinterleave(
                path,
                channels,
                reader
                    .into_samples::<i32>()
                    .map(|s| s.map(|v| v as f32 * scale).map_err(map_err)),
            )?
        }
    };
    if data.iter().map(Vec::len).sum::<usize>() != expected {
        return Err(corrupt(path, "data chunk shorter than declared"));
    }
    Ok((data, spec.sample_rate))
}

fn decode_flac(path: &Path) -> Result<(Vec<Vec<f32>>, u32)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = claxon::FlacReader::new(BufReader::new(file)).map_err(|e| match e {
        claxon::Error::Unsupported(what) => Error::UnsupportedFormat(format!("{}: {what}", path.display())),
        other => corrupt(path, other.to_string()),
    })?;
    let info = reader.streaminfo();
    let channels = info.channels as usize;
    check_channels(path, channels)?;
    let scale = 1.0 / (1u64 << (info.bits_per_sample - 1)) as f32;
    let data = deinterleave(
        path,
        channels,
        reader.samples().map(|s| {
            s.map(|v| v as f32 * scale)
                .map_err(|e| corrupt(path, e.to_string()))
        }),
    )?;
    if let Some(total) = info.samples {
        if data[0].len() as u64 != total {
            return Err(corrupt(path, "stream shorter than declared"));
        }
    }
    Ok((data, info.sample_rate))
}
