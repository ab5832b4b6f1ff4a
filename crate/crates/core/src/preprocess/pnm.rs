//! Binary PGM (P5) and PPM (P6) with maxval 255.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::RasterImage;

#[derive(Debug, Error)]
pub enum PnmError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("unsupported magic {0:?} (expected P5 or P6)")]
    Magic(String),
    #[error("malformed header: {0}")]
    Header(String),
    #[error("only maxval 255 is supported, got {0}")]
    MaxVal(u32),
}

fn next_token<R: BufRead>(r: &mut R) -> Result<String, PnmError> {
    let mut token = Vec::new();
    loop {
        let mut byte = [0u8; 1];
        if r.read(&mut byte)? == 0 {
            break;
        }
        let b = byte[0];
        if b == b'#' && token.is_empty() {
            let mut skip = Vec::new();
            r.read_until(b'\n', &mut skip)?;
            continue;
        }
        if b.is_ascii_whitespace() {
            if token.is_empty() {
                continue;
            }
            break;
        }
        token.push(b);
    }
    if token.is_empty() {
        return Err(PnmError::Header("unexpected end of header".into()));
    }
    String::from_utf8(token).map_err(|e| PnmError::Header(e.to_string()))
}

fn number<R: BufRead>(r: &mut R, what: &str) -> Result<u32, PnmError> {
    let t = next_token(r)?;
    t.parse().map_err(|_| PnmError::Header(format!("bad {what} `{t}`")))
}

/// Reads a P5 (gray) or P6 (RGB) image.
pub fn read_pnm<R: BufRead>(mut r: R) -> Result<RasterImage, PnmError> {
    let magic = next_token(&mut r)?;
    let channels = match magic.as_str() {
        "P5" => 1,
        "P6" => 3,
        _ => return Err(PnmError::Magic(magic)),
    };
    let width = number(&mut r, "width")? as usize;
    let height = number(&mut r, "height")? as usize;
    let maxval = number(&mut r, "maxval")?;
    if maxval != 255 {
        return Err(PnmError::MaxVal(maxval));
    }
    let mut pixels = vec![0u8; width * height * channels as usize];
    r.read_exact(&mut pixels)?;
    RasterImage::new(width, height, channels, pixels).map_err(|e| PnmError::Header(e.to_string()))
}

pub fn write_pnm<W: Write>(img: &RasterImage, mut w: W) -> Result<(), PnmError> {
    let magic = if img.channels() == 1 { "P5" } else { "P6" };
    write!(w, "{magic}\n{} {}\n255\n", img.width(), img.height())?;
    w.write_all(img.pixels())?;
    w.flush()?;
    Ok(())
}
