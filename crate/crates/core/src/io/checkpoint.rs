//! Binary latent-state checkpoints: magic header, version byte, little-endian
//! 64-bit payload, trailing checksum. Truncation, version drift, and
//! corruption are three distinct errors.

use crate::error::{Error, Result};
use crate::mcmc::{
    BlockAdapt, ChainStateSnapshot, DependenceParams, HyperParams, LikelihoodCaches,
    ReplicateCaches,
};
use crate::likelihood::MarginalParamsGpd;
use std::path::Path;

const MAGIC: &[u8; 8] = b"SMXCKPT\0";
const VERSION: u8 = 1;

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new() -> Self {
        Writer { buf: Vec::new() }
    }

    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn f64s(&mut self, vs: &[f64]) {
        self.u64(vs.len() as u64);
        for &v in vs {
            self.f64(v);
        }
    }

    fn u8s(&mut self, vs: &[u8]) {
        self.u64(vs.len() as u64);
        self.buf.extend_from_slice(vs);
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    path: String,
}

impl<'a> Reader<'a> {
    fn need(&self, n: usize) -> Result<()> {
        if self.pos + n > self.buf.len() {
            Err(Error::Truncated {
                path: self.path.clone(),
                needed: self.pos + n,
                had: self.buf.len(),
            })
        } else {
            Ok(())
        }
    }

    fn u8(&mut self) -> Result<u8> {
        self.need(1)?;
        let v = self.buf[self.pos];
        self.pos += 1;
        Ok(v)
    }

    fn u64(&mut self) -> Result<u64> {
        self.need(8)?;
        let v = u64::from_le_bytes(self.buf[self.pos..self.pos + 8].try_into().unwrap());
        self.pos += 8;
        Ok(v)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.u64()? as usize;
        // sanity bound keeps corrupted lengths from allocating the world
        if n > (1 << 32) {
            return Err(Error::Format {
                path: self.path.clone(),
                msg: format!("implausible vector length {n}"),
            });
        }
        self.need(8 * n)?;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(self.f64()?);
        }
        Ok(out)
    }

    fn u8s(&mut self) -> Result<Vec<u8>> {
        let n = self.u64()? as usize;
        if n > (1 << 32) {
            return Err(Error::Format {
                path: self.path.clone(),
                msg: format!("implausible vector length {n}"),
            });
        }
        self.need(n)?;
        let out = self.buf[self.pos..self.pos + n].to_vec();
        self.pos += n;
        Ok(out)
    }
}

fn encode(snap: &ChainStateSnapshot) -> Vec<u8> {
    let mut w = Writer::new();
    w.f64s(&snap.dep.phi_knots);
    w.f64s(&snap.dep.rho_knots);
    w.f64(snap.dep.radius);
    w.f64(snap.dep.theta);
    w.f64(snap.margins.beta_sigma[0]);
    w.f64(snap.margins.beta_sigma[1]);
    w.f64(snap.margins.beta_xi[0]);
    w.f64(snap.margins.beta_xi[1]);
    w.f64(snap.hyper.sigma_beta_sigma);
    w.f64(snap.hyper.sigma_beta_xi);
    w.f64s(&snap.s);
    w.f64s(&snap.z);
    w.u64(snap.adapt.len() as u64);
    for a in &snap.adapt {
        w.f64(a.log_scale);
        w.u64(a.dim as u64);
        w.f64(a.target);
        w.u64(a.proposals);
        w.u64(a.accepts);
        w.u64(a.epoch_proposals);
        w.u64(a.epoch_accepts);
        w.u64(a.epoch_index);
        w.u8(a.frozen as u8);
    }
    w.u64(snap.iteration);
    match &snap.lik_caches {
        None => w.u8(0),
        Some(c) => {
            w.u8(1);
            w.f64s(&c.x0);
            w.u8s(&c.kinds);
            w.f64s(&c.xs);
            w.f64s(&c.logjacs);
        }
    }
    match &snap.rep_caches {
        None => w.u8(0),
        Some(c) => {
            w.u8(1);
            w.f64s(&c.r);
            w.f64s(&c.x_star);
            w.f64s(&c.s_prior);
        }
    }
    w.buf
}

fn decode(r: &mut Reader) -> Result<ChainStateSnapshot> {
    let phi_knots = r.f64s()?;
    let rho_knots = r.f64s()?;
    let radius = r.f64()?;
    let theta = r.f64()?;
    let margins = MarginalParamsGpd {
        beta_sigma: [r.f64()?, r.f64()?],
        beta_xi: [r.f64()?, r.f64()?],
    };
    let hyper = HyperParams {
        sigma_beta_sigma: r.f64()?,
        sigma_beta_xi: r.f64()?,
    };
    let s = r.f64s()?;
    let z = r.f64s()?;
    let n_adapt = r.u64()? as usize;
    if n_adapt > (1 << 24) {
        return Err(Error::Format {
            path: r.path.clone(),
            msg: format!("implausible adapt count {n_adapt}"),
        });
    }
    let mut adapt = Vec::with_capacity(n_adapt);
    for _ in 0..n_adapt {
        adapt.push(BlockAdapt {
            log_scale: r.f64()?,
            dim: r.u64()? as usize,
            target: r.f64()?,
            proposals: r.u64()?,
            accepts: r.u64()?,
            epoch_proposals: r.u64()?,
            epoch_accepts: r.u64()?,
            epoch_index: r.u64()?,
            frozen: r.u8()? != 0,
        });
    }
    let iteration = r.u64()?;
    let lik_caches = if r.u8()? == 1 {
        Some(LikelihoodCaches {
            x0: r.f64s()?,
            kinds: r.u8s()?,
            xs: r.f64s()?,
            logjacs: r.f64s()?,
        })
    } else {
        None
    };
    let rep_caches = if r.u8()? == 1 {
        Some(ReplicateCaches {
            r: r.f64s()?,
            x_star: r.f64s()?,
            s_prior: r.f64s()?,
        })
    } else {
        None
    };
    Ok(ChainStateSnapshot {
        dep: DependenceParams {
            phi_knots,
            rho_knots,
            radius,
            theta,
        },
        margins,
        hyper,
        s,
        z,
        adapt,
        iteration,
        lik_caches,
        rep_caches,
    })
}

const LATENT_MAGIC: &[u8; 8] = b"SMXLATD\0";

/// Latent draws (S, Z per retained iteration) in the same binary envelope.
pub fn write_latent_draws(path: &Path, draws: &[(Vec<f64>, Vec<f64>)]) -> Result<()> {
    let mut w = Writer::new();
    w.u64(draws.len() as u64);
    for (s, z) in draws {
        w.f64s(s);
        w.f64s(z);
    }
    let payload = w.buf;
    let mut out = Vec::with_capacity(payload.len() + 17);
    out.extend_from_slice(LATENT_MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&payload);
    out.extend_from_slice(&super::fnv64(&payload).to_le_bytes());
    std::fs::write(path, &out).map_err(|e| Error::io(path.display().to_string(), &e))
}

pub fn read_latent_draws(path: &Path) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), &e))?;
    let p = path.display().to_string();
    if bytes.len() < LATENT_MAGIC.len() + 9 {
        return Err(Error::Truncated {
            path: p,
            needed: LATENT_MAGIC.len() + 9,
            had: bytes.len(),
        });
    }
    if &bytes[..LATENT_MAGIC.len()] != LATENT_MAGIC {
        return Err(Error::Format {
            path: p,
            msg: "bad magic header".to_string(),
        });
    }
    let version = bytes[LATENT_MAGIC.len()];
    if version != VERSION {
        return Err(Error::VersionMismatch {
            path: p,
            found: version,
            expected: VERSION,
        });
    }
    let payload = &bytes[LATENT_MAGIC.len() + 1..bytes.len() - 8];
    let stored = u64::from_le_bytes(bytes[bytes.len() - 8..].try_into().unwrap());
    let computed = super::fnv64(payload);
    if stored != computed {
        return Err(Error::ChecksumMismatch {
            path: p,
            stored,
            computed,
        });
    }
    let mut r = Reader {
        buf: payload,
        pos: 0,
        path: p.clone(),
    };
    let n = r.u64()? as usize;
    if n > (1 << 32) {
        return Err(Error::Format {
            path: p,
            msg: format!("implausible draw count {n}"),
        });
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let s = r.f64s()?;
        let z = r.f64s()?;
        out.push((s, z));
    }
    Ok(out)
}

pub fn write_checkpoint(path: &Path, snap: &ChainStateSnapshot) -> Result<()> {
    let payload = encode(snap);
    let mut out = Vec::with_capacity(payload.len() + 17);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&payload);
    out.extend_from_slice(&super::fnv64(&payload).to_le_bytes());
    std::fs::write(path, &out).map_err(|e| Error::io(path.display().to_string(), &e))
}

pub fn read_checkpoint(path: &Path) -> Result<ChainStateSnapshot> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), &e))?;
    let p = path.display().to_string();
    if bytes.len() < MAGIC.len() + 1 + 8 {
        return Err(Error::Truncated {
            path: p,
            needed: MAGIC.len() + 9,
            had: bytes.len(),
        });
    }
    if &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::Format {
            path: p,
            msg: "bad magic header".to_string(),
        });
    }
    let version = bytes[MAGIC.len()];
    if version != VERSION {
        return Err(Error::VersionMismatch {
            path: p,
            found: version,
            expected: VERSION,
        });
    }
    let payload = &bytes[MAGIC.len() + 1..bytes.len() - 8];
    let stored = u64::from_le_bytes(bytes[bytes.len() - 8..].try_into().unwrap());
    let computed = super::fnv64(payload);
    if stored != computed {
        return Err(Error::ChecksumMismatch {
            path: p,
            stored,
            computed,
        });
    }
    let mut reader = Reader {
        buf: payload,
        pos: 0,
        path: p,
    };
    decode(&mut reader)
}
