use synthetic_tasks::{make_rotation_pairs, CorruptionKind, PairSetConfig};

// Decode each image's yellow-marker angle from pixels; the difference
// should reproduce g_true.
fn marker_angle(img: &tensor_autodiff::Tensor, ch_r: usize) -> f64 {
    let (h, w) = (img.shape()[1], img.shape()[2]);
    let (cy, cx) = ((h / 2) as f64, (w / 2) as f64);
    let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
    for i in 0..h {
        for j in 0..w {
            let r = img.at3(ch_r, i, j);
            let g = img.at3(1, i, j);
            let b = img.at3(2, i, j);
            let yellowness = (r * g * (1.0 - b)).max(0.0);
            if yellowness > 0.1 {
                sx += yellowness * (j as f64 - cx);
                sy += yellowness * (cy - i as f64);
                sw += yellowness;
            }
        }
    }
    (sy / sw).atan2(sx / sw)
}

fn main() {
    let set = make_rotation_pairs(PairSetConfig {
        n_train: 64, n_val: 1, n_test: 1, px: 39,
        corruption: CorruptionKind::None, seed: 5,
    }).unwrap();
    let mut correct = 0;
    for s in &set.samples[..64] {
        let aa = marker_angle(&s.image_a, 0);
        let ab = marker_angle(&s.image_b, 0);
        let mut diff = ab - aa;
        while diff < -0.001 { diff += std::f64::consts::TAU; }
        let class = (diff / (std::f64::consts::TAU / 8.0)).round() as usize % 8;
        if class == s.g_true { correct += 1; }
    }
    println!("pixel-decode accuracy: {}/64", correct);
    let s = &set.samples[3];
    println!("g_true {} label {}", s.g_true, s.label);
    for img in [&s.image_a, &s.image_b] {
        for i in 0..39 {
            let mut line = String::new();
            for j in 0..39 {
                let r = img.at3(0, i, j); let g = img.at3(1, i, j); let b = img.at3(2, i, j);
                let ch = if r > 0.4 && g > 0.55 && b < 0.3 { 'Y' }
                    else if r > 0.4 && g <= 0.55 && g > 0.1 { 'O' }
                    else if g > 0.4 && r < 0.3 { 'G' }
                    else if r + g + b > 0.15 { '.' } else { ' ' };
                line.push(ch);
            }
            println!("{line}");
        }
        println!("---");
    }
}
