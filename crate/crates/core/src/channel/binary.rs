use super::{ChannelLaw, ChannelParts, Csir, Distortion, IsacChannel};
use crate::prob::{Alphabet, JointPmf};

/// State pmf `P_S` of the binary example.
pub const BINARY_STATE_PMF: [f64; 4] = [0.1, 0.2, 0.3, 0.4];

/// The binary ISAC channel `Y = S·X mod 2` with `S ∈ {0,1,2,3}`, echo
/// `Z = Y`, sensing state `S_T = 1{S = 3}` and Hamming distortion.
///
/// With [`Csir::Perfect`] the receiver observes `S_R = S`; with
/// [`Csir::None`] the side-information alphabet is a singleton.
pub fn binary_example(csir: Csir) -> IsacChannel {
    let nr = match csir {
        Csir::None => 1,
        Csir::Perfect => 4,
    };
    let mut joint = vec![0.0; 4 * 2 * nr];
    for (s, &p) in BINARY_STATE_PMF.iter().enumerate() {
        let t = usize::from(s == 3);
        let r = if nr == 1 { 0 } else { s };
        joint[(s * 2 + t) * nr + r] = p;
    }
    let law = ChannelLaw::joint_from_fn(2, 4, 2, 2, |x, s, y, z| {
        let out = (s * x) % 2;
        if y == out && z == out {
            1.0
        } else {
            0.0
        }
    })
    .expect("binary channel law is deterministic");
    let two = || Alphabet::new(2).expect("nonempty");
    ChannelParts {
        x: two(),
        s: Alphabet::new(4).expect("nonempty"),
        st: two(),
        shat: two(),
        sr: Alphabet::new(nr).expect("nonempty"),
        y: two(),
        z: two(),
        state_joint: JointPmf::new(vec![4, 2, nr], joint).expect("state pmf sums to one"),
        channel_law: law,
        distortion: Distortion::Hamming,
        input_cost: None,
    }
    .validate()
    .expect("binary example is a valid channel")
}
