//! Shared helpers for the integration suite: a frozen high-precision
//! reference table for the interaction potential, quadrature, finite
//! differences, and scalar root finding. Everything here is deliberately
//! independent of the library internals so the tests act as oracles.

#![allow(dead_code)]

/// Reference values of the wall interaction potential, computed from the
/// coth/log-sinh closed form in 50-digit arithmetic and rounded to the
/// nearest f64. 160 points on a logarithmic grid over [1e-8, 50].
pub const V_COTH_FORM_REFERENCE: &[(f64, f64)] = &[
    (9.999999999999982e-09, 1.7815104803595085),
    (1.1507998890515551e-08, 1.7672791849015153),
    (1.324340384641074e-08, 1.7530478894435222),
    (1.5240507677114444e-08, 1.7388165939855291),
    (1.7538774543912708e-08, 1.7245852985275358),
    (2.0183619799235022e-08, 1.7103540030695428),
    (2.3227307425618474e-08, 1.6961227076115497),
    (2.672998280836815e-08, 1.6818914121535566),
    (3.0760861250220096e-08, 1.6676601166955636),
    (3.5399595713883635e-08, 1.6534288212375705),
    (4.0737850820007265e-08, 1.6391975257795774),
    (4.6881114203863246e-08, 1.6249662303215844),
    (5.395078102441921e-08, 1.6107349348635913),
    (6.208655281714648e-08, 1.5965036394055983),
    (7.144919809356581e-08, 1.5822723439476054),
    (8.222372923889826e-08, 1.5680410484896126),
    (9.462305848552941e-08, 1.5538097530316197),
    (1.0889220520686625e-07, 1.539578457573627),
    (1.2531313767064106e-07, 1.5253471621156347),
    (1.4421034492807626e-07, 1.5111158666576423),
    (1.6595724894331694e-07, 1.4968845711996503),
    (1.9098358367127079e-07, 1.4826532757416586),
    (2.1978388689956722e-07, 1.4684219802836675),
    (2.5292727265934197e-07, 1.454190684825677),
    (2.910686773144837e-07, 1.4399593893676872),
    (3.349618015598913e-07, 1.4257280939096988),
    (3.854740040716326e-07, 1.4114967984517117),
    (4.436034411178943e-07, 1.3972655029937266),
    (5.104987908213618e-07, 1.383034207535744),
    (5.874819518381772e-07, 1.368802912077765),
    (6.760741649951666e-07, 1.3545716166197905),
    (7.780260740670619e-07, 1.3403403211618221),
    (8.953523197155934e-07, 1.3261090257038617),
    (1.0303713501907592e-06, 1.311877730245912),
    (1.185751235481429e-06, 1.2976464347879761),
    (1.3645623902347753e-06, 1.283415139330059),
    (1.570338247286107e-06, 1.2691838438721665),
    (1.8071450807502686e-06, 1.2549525484143067),
    (2.0796623584274766e-06, 1.2407212529564902),
    (2.3932752113430394e-06, 1.2264899574987307),
    (2.754180847683412e-06, 1.2122586620410472),
    (3.169511013941994e-06, 1.1980273665834642),
    (3.6474729231921354e-06, 1.183796071126014),
    (4.197511435328069e-06, 1.1695647756687402),
    (4.830495694068184e-06, 1.1553334802116995),
    (5.558933908797691e-06, 1.1411021847549676),
    (6.397220525489321e-06, 1.126870889298645),
    (7.361920670971455e-06, 1.112639593842864),
    (8.472097491360316e-06, 1.0984082983878005),
    (9.749688853091411e-06, 1.0841770029336877),
    (1.12199408504248e-05, 1.069945707480833),
    (1.2911906685833892e-05, 1.0557144120296449),
    (1.4859020781501702e-05, 1.041483116580664),
    (1.709975946676694e-05, 1.027251821134606),
    (1.9678401297163712e-05, 1.0130205256924192),
    (2.2645902029488017e-05, 0.9987892302553589),
    (2.6060901543007245e-05, 0.984557934825088),
    (2.999088260427629e-05, 0.9703266394038087),
    (3.451350437355943e-05, 0.9560953439944371),
    (3.971813700387263e-05, 0.9418640486008353),
    (4.570762765739125e-05, 0.9276327532281181),
    (5.260033283693574e-05, 0.9134014578830596),
    (6.0532457192820626e-05, 0.8991701625746303),
    (6.966074502151599e-05, 0.8849388673147109),
    (8.016557764200941e-05, 0.8707075721190345),
    (9.225453785617842e-05, 0.856476277008438),
    (0.00010616651192939281, 0.8422449820105163),
    (0.00012217641014933606, 0.8280136871618143),
    (0.00014060059924457348, 0.81378239251073),
    (0.00016180315401123762, 0.7995510981213588),
    (0.00018620305168432427, 0.7853198040785849),
    (0.00021428245121938176, 0.7710885104948237),
    (0.0002465962210889602, 0.7568572175189515),
    (0.0002837829038697087, 0.7426259253481313),
    (0.0003265773342879895, 0.7283946342434738),
    (0.0003758251600653716, 0.7141633445507786),
    (0.00043249955250601336, 0.6999320567280016),
    (0.0004977204370387682, 0.6857007713816325),
    (0.0005727766237229071, 0.6714694893148697),
    (0.0006591512750316469, 0.6572382115914204),
    (0.0007585512141746119, 0.643006939619994),
    (0.0008729406531120673, 0.6287756752661997),
    (0.0010045800067499608, 0.6145444210007356),
    (0.0011560705603112676, 0.6003131800956412),
    (0.0013304058725419781, 0.5860819568842007),
    (0.0015310309305148486, 0.5718507571051399),
    (0.0017619102249709902, 0.5576195883584538),
    (0.0020276060914154194, 0.5433884607090692),
    (0.002333368865041126, 0.5291573874862798),
    (0.0026852406310056863, 0.5149263863424417),
    (0.003090174620238077, 0.5006954806549908),
    (0.0035561726101199166, 0.4864647013830982),
    (0.004092443045174187, 0.47223408952634705),
    (0.004709583002336271, 0.4580036993805673),
    (0.00541978759656768, 0.443773602849159),
    (0.006237090964813092, 0.42954389515185826),
    (0.007177643590311376, 0.415314702383517),
    (0.008260031447381936, 0.40108619152175173),
    (0.009505643273209506, 0.3868585836756523),
    (0.01093909322417318, 0.37263217162312773),
    (0.012588707268703137, 0.35840734302149196),
    (0.014487082928126102, 0.34418461112018556),
    (0.016671733426368227, 0.329964655389303),
    (0.019185828977361694, 0.3157483752457225),
    (0.022079049858509985, 0.30153696106483263),
    (0.02540856812753709, 0.287331987979052),
    (0.029240177382128616, 0.27313553966966125),
    (0.033649592887201464, 0.2589503715578828),
    (0.03872394776122151, 0.24478012561110457),
    (0.04456351478725201, 0.23062961252267766),
    (0.05128368787291704, 0.21650518140520078),
    (0.05901726231430762, 0.20241520240416835),
    (0.06791705892343186, 0.18837069369353393),
    (0.07815894387379345, 0.17438613076164533),
    (0.08994530393834839, 0.16048048177574536),
    (0.10350904579295991, 0.14667851616023117),
    (0.11911819841437082, 0.13301243066909),
    (0.13708120951927932, 0.11952382178100088),
    (0.1577530407058399, 0.10626599474162088),
    (0.18154218174182632, 0.09330652215651479),
    (0.2089187226066721, 0.08072982702805073),
    (0.24042364279655132, 0.06863934196179587),
    (0.27667950145564246, 0.057158471336153586),
    (0.31840273957799353, 0.046429173914509236),
    (0.3664178373800668, 0.03660658911315497),
    (0.4216736066034924, 0.027847997564825925),
    (0.48526193969526726, 0.020294969655089475),
    (0.558439386362257, 0.014049340413147692),
    (0.6426519838677051, 0.009146884248025271),
    (0.7395638317337181, 0.005536468376349882),
    (0.8510899755057072, 0.003074692440247622),
    (0.9794342493848605, 0.0015433791914664591),
    (1.1271328255253925, 0.000688484140364893),
    (1.29710433056099, 0.0002677690886065881),
    (1.4927075196978814, 8.88503710176193e-05),
    (1.717807648054747, 2.4539855997947204e-05),
    (1.9768528507933194, 5.484563550243541e-06),
    (2.2749620413642067, 9.603134239571058e-07),
    (2.618026064798433, 1.2692250260915925e-07),
    (3.012824104904121, 1.2132729119819992e-08),
    (3.46715764565552, 7.986004437856308e-10),
    (3.9900046339446305, 3.420615919413112e-11),
    (4.59169689005868, 8.934006980384567e-13),
    (5.284124271637909, 1.3202990815230385e-14),
    (6.080969625535546, 1.0130037459609682e-16),
    (6.997979170392195, 3.65480885728667e-19),
    (8.053273652872447, 5.532984371823123e-22),
    (9.26770642622744, 3.0829624762106975e-25),
    (10.665275527064942, 5.437330170465658e-29),
    (12.273597893250622, 2.551725412056738e-33),
    (14.124455093816243, 2.609594485614662e-38),
    (16.254421354877433, 4.62154362935844e-44),
    (18.705586291790212, 1.087957005121711e-50),
    (21.526386629236505, 2.511103390526994e-58),
    (24.772563344606294, 4.003437299403491e-67),
    (28.508263148495594, 2.9462421980049877e-77),
    (32.807306068341326, 6.294006466808406e-89),
    (37.754644183527674, 2.2887053474621845e-102),
    (43.44804033758467, 7.664442368069348e-118),
    (50.000000000000014, 1.1657218849865492e-135),
];

/// Composite adaptive Simpson quadrature with an absolute tolerance.
///
/// The recursion bisects until the two-panel Richardson estimate meets the
/// local error budget; depth is capped to keep pathological integrands from
/// hanging the suite.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
        }
    }
    let (fa, fb) = (f(a), f(b));
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}

/// Central difference approximation of f'(x) with step h.
pub fn central_diff(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Central difference approximation of f''(x) with step h.
pub fn second_diff(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

/// Bisection for a root of f on [lo, hi]; requires a sign change.
pub fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let (flo, fhi) = (f(lo), f(hi));
    assert!(
        flo * fhi <= 0.0,
        "bisect needs a bracket: f({lo}) = {flo:e}, f({hi}) = {fhi:e}"
    );
    let increasing = fhi > flo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm > 0.0) == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// n logarithmically spaced points covering [a, b], endpoints included.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a && n >= 2, "logspace needs 0 < a < b and n >= 2");
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// `∫_0^a V` for small `a` from the series
/// `V(s) = (1 − log 2πs)/π² + s²/6 − π²s⁴/60 + O(s⁶)`.
pub fn v_head_integral(a: f64) -> f64 {
    let pi = std::f64::consts::PI;
    (2.0 * a - a * (2.0 * pi * a).ln()) / (pi * pi) + a.powi(3) / 18.0
        - pi * pi * a.powi(5) / 300.0
}
