//! Small high-pass filters used for demodulation.

/// 4-neighbour Laplacian `4x - up - down - left - right` of every channel,
/// with replicated borders. Layout matches [`crate::media::ImageBuffer`].
pub fn laplacian(data: &[f64], height: usize, width: usize, channels: usize) -> Vec<f64> {
    let idx = |y: usize, x: usize, c: usize| (y * width + x) * channels + c;
    let mut out = vec![0.0; data.len()];
    for y in 0..height {
        let up = y.saturating_sub(1);
        let down = (y + 1).min(height - 1);
        for x in 0..width {
            let left = x.saturating_sub(1);
            let right = (x + 1).min(width - 1);
            for c in 0..channels {
                let v = data[idx(y, x, c)];
                out[idx(y, x, c)] = (v - data[idx(up, x, c)])
                    + (v - data[idx(down, x, c)])
                    + (v - data[idx(y, left, c)])
                    + (v - data[idx(y, right, c)]);
            }
        }
    }
    out
}

/// First difference `x[i] - x[i-1]`, zero at the first sample.
pub fn first_difference(samples: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(samples.len());
    out.push(0.0);
    out.extend(samples.windows(2).map(|w| w[1] - w[0]));
    out
}
