use super::CodecError;

/// Preamble + SFD (8), FCS (4), minimum inter-packet gap (12), Ethernet
/// header (14): bytes on the wire around each IP datagram.
pub const LINE_OVERHEAD_BYTES: usize = 38;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateClass {
    G1,
    G10,
    G40,
    G100,
}

impl RateClass {
    pub fn line_rate_bps(&self) -> f64 {
        match self {
            RateClass::G1 => 1e9,
            RateClass::G10 => 10e9,
            RateClass::G40 => 40e9,
            RateClass::G100 => 100e9,
        }
    }
}

/// One row of the supported core interfaces: rate class, word width and
/// datapath clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatapathConfig {
    pub rate: RateClass,
    pub width_bits: usize,
    pub clock_mhz: f64,
}

impl DatapathConfig {
    pub const ONE_G: DatapathConfig = DatapathConfig {
        rate: RateClass::G1,
        width_bits: 8,
        clock_mhz: 125.0,
    };
    pub const TEN_G: DatapathConfig = DatapathConfig {
        rate: RateClass::G10,
        width_bits: 64,
        clock_mhz: 156.25,
    };
    pub const FORTY_G_128: DatapathConfig = DatapathConfig {
        rate: RateClass::G40,
        width_bits: 128,
        clock_mhz: 322.22,
    };
    pub const FORTY_G_256: DatapathConfig = DatapathConfig {
        rate: RateClass::G40,
        width_bits: 256,
        clock_mhz: 322.22,
    };
    pub const HUNDRED_G: DatapathConfig = DatapathConfig {
        rate: RateClass::G100,
        width_bits: 512,
        clock_mhz: 322.22,
    };

    pub const ALL: [DatapathConfig; 5] = [
        Self::ONE_G,
        Self::TEN_G,
        Self::FORTY_G_128,
        Self::FORTY_G_256,
        Self::HUNDRED_G,
    ];

    /// Looks up the row for `rate` with the given width.
    pub fn new(rate: RateClass, width_bits: usize) -> Result<Self, CodecError> {
        Self::ALL
            .into_iter()
            .find(|c| c.rate == rate && c.width_bits == width_bits)
            .ok_or_else(|| CodecError::Words(format!("no {rate:?} datapath of {width_bits} bits")))
    }

    pub fn width_bytes(&self) -> usize {
        self.width_bits / 8
    }

    /// Raw datapath capacity, `width · clock`.
    pub fn capacity_bps(&self) -> f64 {
        self.width_bits as f64 * self.clock_mhz * 1e6
    }

    pub fn transmit_cycles(&self, frame_bytes: usize) -> usize {
        frame_bytes.div_ceil(self.width_bytes())
    }

    pub fn transmit_seconds(&self, frame_bytes: usize) -> f64 {
        self.transmit_cycles(frame_bytes) as f64 / (self.clock_mhz * 1e6)
    }
}

/// A frame as datapath words. The last word is zero-filled past
/// `last_word_bytes` valid bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatapathFrame {
    pub width_bytes: usize,
    pub words: Vec<Vec<u8>>,
    pub last_word_bytes: usize,
}

impl DatapathFrame {
    pub fn from_bytes(bytes: &[u8], dp: &DatapathConfig) -> Self {
        let w = dp.width_bytes();
        let words: Vec<Vec<u8>> = bytes
            .chunks(w)
            .map(|c| {
                let mut word = c.to_vec();
                word.resize(w, 0);
                word
            })
            .collect();
        let last_word_bytes = match bytes.len() % w {
            0 if bytes.is_empty() => 0,
            0 => w,
            r => r,
        };
        DatapathFrame {
            width_bytes: w,
            words,
            last_word_bytes,
        }
    }

    pub fn byte_len(&self) -> usize {
        match self.words.len() {
            0 => 0,
            k => (k - 1) * self.width_bytes + self.last_word_bytes,
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, CodecError> {
        if self.last_word_bytes > self.width_bytes
            || (self.words.is_empty() != (self.last_word_bytes == 0))
        {
            return Err(CodecError::Words(format!(
                "last word holds {} of {} bytes",
                self.last_word_bytes, self.width_bytes
            )));
        }
        let mut out = Vec::with_capacity(self.byte_len());
        for (i, word) in self.words.iter().enumerate() {
            if word.len() != self.width_bytes {
                return Err(CodecError::Words(format!(
                    "word {i} is {} bytes, datapath is {}",
                    word.len(),
                    self.width_bytes
                )));
            }
            let take = if i + 1 == self.words.len() {
                self.last_word_bytes
            } else {
                self.width_bytes
            };
            out.extend_from_slice(&word[..take]);
        }
        Ok(out)
    }
}
