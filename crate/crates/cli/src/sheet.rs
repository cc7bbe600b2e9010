//! Contact sheet: the frames a model would be shown, tiled into one image.

use ssr_forge::frame::{Fps, Frame, FrameSequence};

const COLUMNS: usize = 8;
const THUMB_WIDTH: u32 = 128;
const GAP: u32 = 2;

/// 2 fps, at most 48 frames, nearest-neighbour thumbnails on a grey grid.
pub fn contact_sheet(seq: &FrameSequence) -> Frame {
    let input = seq.sample_for_model(Fps::integer(2).expect("2 fps"), 48);
    tile(&input.frames)
}

fn tile(frames: &[Frame]) -> Frame {
    let (w, h) = (frames[0].width(), frames[0].height());
    let tw = THUMB_WIDTH.min(w);
    let th = ((h as u64 * tw as u64) / w as u64).max(1) as u32;
    let cols = COLUMNS.min(frames.len()) as u32;
    let rows = frames.len().div_ceil(COLUMNS) as u32;
    let sw = cols * tw + (cols + 1) * GAP;
    let sh = rows * th + (rows + 1) * GAP;
    let mut data = vec![96u8; (sw * sh * 3) as usize];
    for (i, f) in frames.iter().enumerate() {
        let ox = GAP + (i as u32 % cols) * (tw + GAP);
        let oy = GAP + (i as u32 / cols) * (th + GAP);
        for y in 0..th {
            for x in 0..tw {
                let px = f.pixel(x * w / tw, y * h / th);
                let at = (((oy + y) * sw + ox + x) * 3) as usize;
                data[at..at + 3].copy_from_slice(&px);
            }
        }
    }
    Frame::new(sw, sh, data).expect("sheet buffer sized to its dimensions")
}
