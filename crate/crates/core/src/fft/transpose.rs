//! All-to-all redistribution between the two slab layouts.
//!
//! The source array has layout `[a][y][b]` and is split across workers along
//! `a`; the destination has layout `[b][y][a]` and is split along `b`. Worker
//! `w` sends worker `q` the block of its `a` planes that intersects `q`'s `b`
//! range. Pack, exchange and unpack each run as a separate collective phase.

use std::ops::Range;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use crate::team::{split_mut_by_ranges, WorkerTeam};

/// Shape of one redistribution.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Exchange<'a> {
    pub na: usize,
    pub ny: usize,
    pub nb: usize,
    /// Source decomposition of `a`.
    pub src: &'a [Range<usize>],
    /// Destination decomposition of `b`.
    pub dst: &'a [Range<usize>],
}

#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct ExchangeTimes {
    pub pack: Duration,
    pub exchange: Duration,
    pub unpack: Duration,
}

impl Exchange<'_> {
    fn src_chunks(&self) -> Vec<Range<usize>> {
        let plane = self.ny * self.nb;
        self.src.iter().map(|r| r.start * plane..r.end * plane).collect()
    }

    fn dst_chunks(&self) -> Vec<Range<usize>> {
        let plane = self.ny * self.na;
        self.dst.iter().map(|r| r.start * plane..r.end * plane).collect()
    }

    /// Offset of block `(w -> q)` inside worker `w`'s send chunk.
    fn send_offset(&self, w: usize, q: usize) -> usize {
        self.src[w].len() * self.ny * self.dst[q].start
    }

    /// Offset of block `(w -> q)` inside worker `q`'s receive chunk.
    fn recv_offset(&self, w: usize, q: usize) -> usize {
        self.dst[q].len() * self.ny * self.src[w].start
    }

    fn block_len(&self, w: usize, q: usize) -> usize {
        self.src[w].len() * self.ny * self.dst[q].len()
    }
}

/// Redistributes `src` into `dst` through the `send`/`recv` staging buffers.
pub(crate) fn exchange(
    team: &WorkerTeam,
    shape: Exchange<'_>,
    src: &[Complex64],
    dst: &mut [Complex64],
    send: &mut [Complex64],
    recv: &mut [Complex64],
) -> ExchangeTimes {
    let p = shape.src.len();
    debug_assert_eq!(p, shape.dst.len());
    let (ny, na, nb) = (shape.ny, shape.na, shape.nb);
    let src_chunks = shape.src_chunks();
    let dst_chunks = shape.dst_chunks();
    let mut times = ExchangeTimes::default();

    if p == 1 {
        // Single worker: nothing leaves the worker, transpose locally.
        let t = Instant::now();
        local_transpose(src, dst, na, ny, nb);
        times.unpack = t.elapsed();
        return times;
    }

    // Pack: worker w orders its outgoing data by destination, each block as [b][y][a_local].
    let t = Instant::now();
    {
        let parts: Vec<_> = split_mut_by_ranges(send, &src_chunks)
            .into_iter()
            .zip(&src_chunks)
            .collect();
        team.scatter(parts, |w, (out, chunk)| {
            let input = &src[chunk.clone()];
            let a_len = shape.src[w].len();
            for q in 0..p {
                let block = &mut out[shape.send_offset(w, q)..][..shape.block_len(w, q)];
                let b_range = shape.dst[q].clone();
                let b_len = b_range.len();
                for al in 0..a_len {
                    for y in 0..ny {
                        let row = &input[(al * ny + y) * nb..][..nb];
                        for (bl, &v) in row[b_range.clone()].iter().enumerate() {
                            block[(bl * ny + y) * a_len + al] = v;
                        }
                    }
                }
                debug_assert_eq!(block.len(), a_len * ny * b_len);
            }
        });
    }
    times.pack = t.elapsed();

    // Exchange: worker q pulls block (w -> q) from every sender.
    let t = Instant::now();
    {
        let send: &[Complex64] = send;
        let parts = split_mut_by_ranges(recv, &dst_chunks);
        team.scatter(parts, |q, inbox| {
            for w in 0..p {
                let len = shape.block_len(w, q);
                let from = src_chunks[w].start + shape.send_offset(w, q);
                inbox[shape.recv_offset(w, q)..][..len].copy_from_slice(&send[from..][..len]);
            }
        });
    }
    times.exchange = t.elapsed();

    // Unpack: interleave the received blocks into [b_local][y][a].
    let t = Instant::now();
    {
        let recv: &[Complex64] = recv;
        let parts: Vec<_> = split_mut_by_ranges(dst, &dst_chunks)
            .into_iter()
            .zip(&dst_chunks)
            .collect();
        team.scatter(parts, |q, (out, chunk)| {
            let inbox = &recv[chunk.clone()];
            let b_len = shape.dst[q].len();
            for w in 0..p {
                let a_range = shape.src[w].clone();
                let a_len = a_range.len();
                let block = &inbox[shape.recv_offset(w, q)..][..shape.block_len(w, q)];
                for bl in 0..b_len {
                    for y in 0..ny {
                        let from = &block[(bl * ny + y) * a_len..][..a_len];
                        out[(bl * ny + y) * na + a_range.start..][..a_len].copy_from_slice(from);
                    }
                }
            }
        });
    }
    times.unpack = t.elapsed();
    times
}

/// `dst[b][y][a] = src[a][y][b]`.
pub(crate) fn local_transpose(src: &[Complex64], dst: &mut [Complex64], na: usize, ny: usize, nb: usize) {
    for a in 0..na {
        for y in 0..ny {
            let row = &src[(a * ny + y) * nb..][..nb];
            for (b, &v) in row.iter().enumerate() {
                dst[(b * ny + y) * na + a] = v;
            }
        }
    }
}
