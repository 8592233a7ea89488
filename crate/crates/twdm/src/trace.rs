//! CSV traces of generated packets and simulator events.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use twdm_core::sim::{Observer, TraceEvent};
use twdm_core::traffic::Packet;
use twdm_core::OnuId;

pub const TRAFFIC_HEADER: &str = "arrival_ns,onu_id,bytes";
pub const EVENT_HEADER: &str = "timestamp,event,onu,receiver,bytes";

/// Writes whichever traces were requested. Write errors are kept and
/// reported by [`TraceWriter::finish`], since observer hooks cannot fail.
pub struct TraceWriter {
    traffic: Option<BufWriter<File>>,
    events: Option<BufWriter<File>>,
    error: Option<io::Error>,
}

impl TraceWriter {
    pub fn create(traffic: Option<&Path>, events: Option<&Path>) -> io::Result<Self> {
        let open = |p: Option<&Path>, header: &str| -> io::Result<Option<BufWriter<File>>> {
            p.map(|p| {
                let mut w = BufWriter::new(File::create(p)?);
                writeln!(w, "{header}")?;
                Ok(w)
            })
            .transpose()
        };
        Ok(TraceWriter { traffic: open(traffic, TRAFFIC_HEADER)?, events: open(events, EVENT_HEADER)?, error: None })
    }

    fn keep(&mut self, r: io::Result<()>) {
        if let Err(e) = r {
            self.error.get_or_insert(e);
        }
    }

    pub fn finish(mut self) -> io::Result<()> {
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        for w in [self.traffic.as_mut(), self.events.as_mut()].into_iter().flatten() {
            w.flush()?;
        }
        Ok(())
    }
}

impl Observer for TraceWriter {
    fn packet(&mut self, onu: OnuId, p: &Packet) {
        if let Some(w) = self.traffic.as_mut() {
            let r = writeln!(w, "{},{},{}", p.arrival.as_nanos(), onu.0, p.bytes);
            self.keep(r);
        }
    }

    fn event(&mut self, e: &TraceEvent) {
        if let Some(w) = self.events.as_mut() {
            let r = writeln!(w, "{},{},{},{},{}", e.time.as_nanos(), e.kind.name(), e.onu.0, e.receiver.0, e.bytes);
            self.keep(r);
        }
    }
}
