use super::Image;

/// Per-channel median over a `(2r+1) x (2r+1)` window with edge replication.
pub fn median_filter(img: &Image, radius: usize) -> Image {
    if radius == 0 {
        return img.clone();
    }
    let (w, h) = (img.width(), img.height());
    let r = radius as isize;
    let side = 2 * radius + 1;
    let mut window = Vec::with_capacity(side * side);
    let mut pixels = Vec::with_capacity(img.pixels().len());
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                window.clear();
                for dy in -r..=r {
                    let sy = clamp(y as isize + dy, h);
                    for dx in -r..=r {
                        let sx = clamp(x as isize + dx, w);
                        window.push(img.channel(sx, sy, c));
                    }
                }
                let mid = window.len() / 2;
                let (_, median, _) = window.select_nth_unstable(mid);
                pixels.push(*median);
            }
        }
    }
    Image::new(w, h, pixels).expect("dimensions unchanged")
}
