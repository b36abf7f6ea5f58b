// Generated by tools/exp_rational_remez.py; do not edit by hand.
// Best uniform type (r, r) rational approximations of exp(-s) on [0, inf)
// in the form a0 + sum_j a_j / (1 + b_j s). Only one member of each
// conjugate pair is stored (imaginary part > 0); real poles have im = 0.

pub(crate) struct ExpTable {
    pub degree: usize,
    pub max_error: f64,
    pub constant: f64,
    pub poles: &'static [((f64, f64), (f64, f64))],
}

pub(crate) static EXP_TABLES: &[ExpTable] = &[
    ExpTable {
        degree: 3,
        max_error: 7.9938063633568783e-4,
        constant: -7.9938063633568783e-4,
        poles: &[
            ((1.0840116054659961, 0.0), (7.3054059579300263e-1, 0.0)),
            ((-4.1206422096662342e-2, -2.8331495643889513e-1), (3.387648755225975e-2, 4.120264511006937e-1)),
        ],
    },
    ExpTable {
        degree: 4,
        max_error: 8.6522406952888523e-5,
        constant: 8.6522406952888523e-5,
        poles: &[
            ((-1.1978520171978572e-1, -3.210893826615783e-2), (-2.7213212013415337e-2, 2.7062791654155225e-1)),
            ((6.1969867931283283e-1, -7.5334214574995084e-1), (4.0555474645506388e-1, 3.1216195322114406e-1)),
        ],
    },
    ExpTable {
        degree: 5,
        max_error: 9.3457131530266465e-6,
        constant: -9.3457131530266465e-6,
        poles: &[
            ((1.5179530128283424, 0.0), (4.6394767859191943e-1, 0.0)),
            ((-2.9989761793125979e-2, 4.2186074650976779e-2), (-4.1086110522621662e-2, 1.9451630794021915e-1)),
            ((-2.2897739890789221e-1, -6.4352626508074141e-1), (1.8419948937420608e-1, 3.0648644252750674e-1)),
        ],
    },
    ExpTable {
        degree: 6,
        max_error: 1.0084543748996707e-6,
        constant: 1.0084543748996707e-6,
        poles: &[
            ((1.2280990781604558e-2, 1.7020254206793004e-2), (-4.286486113990663e-2, 1.4905406383536161e-1)),
            ((9.051465386182989e-1, -1.3358856457608693), (3.3404565758280537e-1, 1.6602482439557884e-1)),
            ((-4.1742853785427836e-1, -4.9628038662192989e-2), (8.0405757525728023e-2, 2.5087214552775179e-1)),
        ],
    },
    ExpTable {
        degree: 7,
        max_error: 1.087497491375248e-7,
        constant: -1.087497491375248e-7,
        poles: &[
            ((2.4438589150974376, 0.0), (3.4000919592758712e-1, 0.0)),
            ((7.9040688414842756e-3, -2.5827840924260641e-3), (-4.1146186255139738e-2, 1.1950559975671467e-1)),
            ((-1.2068559410346739e-1, 2.0522624972469415e-1), (3.1521568226603746e-2, 2.0152681015690805e-1)),
            ((-6.0914782353698657e-1, -1.2455278295127384), (2.0892379639176069e-1, 2.0632284636585363e-1)),
        ],
    },
    ExpTable {
        degree: 8,
        max_error: 1.1722652116334907e-8,
        constant: 1.1722652116334907e-8,
        poles: &[
            ((-6.4203306669411067e-5, -3.2313330533011135e-3), (-3.8477928930575016e-2, 9.9036023816371626e-2)),
            ((1.4636556276781621, -2.4149929424403647), (2.7297959797898102e-1, 1.0116092498819639e-1)),
            ((7.7445801974746029e-2, 1.0057774228761888e-1), (7.2710130940992562e-3, 1.640965439089077e-1)),
            ((-1.0410372380688908, -1.3864809194716747e-2), (1.258097688618683e-1, 1.976278324022155e-1)),
        ],
    },
    ExpTable {
        degree: 9,
        max_error: 1.2632924833223141e-9,
        constant: -1.2632924833223141e-9,
        poles: &[
            ((4.2326983295959449, 0.0), (2.6835260491282388e-1, 0.0)),
            ((-1.1926659034492805e-3, -3.2498964388514632e-4), (-3.5695797963411679e-2, 8.4148829669398749e-2)),
            ((6.1803114318924143e-2, -1.8734962559170992e-2), (-5.311470522042603e-3, 1.3624169763999359e-1)),
            ((-1.3706298838396243, -2.3614937616016997), (1.9832251290914225e-1, 1.428620686661879e-1)),
            ((-3.0632972811053047e-1, 6.418271802369249e-1), (7.476555094029309e-2, 1.7584190144390837e-1)),
        ],
    },
    ExpTable {
        degree: 10,
        max_error: 1.3611205233454477e-10,
        constant: 1.3611205233454477e-10,
        poles: &[
            ((2.5239976923448321, -4.4792715075211471), (2.2822702097200737e-1, 6.7648538157330095e-2)),
            ((-2.4135200571160255e-4, 3.9904858378405394e-4), (-3.3077758330456805e-2, 7.2902678788885734e-2)),
            ((1.6360631854938443e-3, -3.1589346045088302e-2), (-1.2011288626159283e-2, 1.1526098882518704e-1)),
            ((-2.3234459629682447, 1.4257154510229864e-1), (1.3853948755615843e-1, 1.5164493773685269e-1)),
            ((2.980535593075183e-1, 3.4017622503508656e-1), (4.3525682130997367e-2, 1.5322830837722426e-1)),
        ],
    },
    ExpTable {
        degree: 11,
        max_error: 1.4663111949374871e-11,
        constant: -1.4663111949374871e-11,
        poles: &[
            ((7.6685583773318647, 0.0), (2.216497594830232e-1, 0.0)),
            ((1.1920533883310024e-4, 1.2657174053479422e-4), (-3.0703874927452655e-2, 6.4145826482356559e-2)),
            ((-1.3910155238583531e-2, -5.6449909512157958e-3), (-1.5580845112339856e-2, 9.9144683120404467e-2)),
            ((-2.9141857095959168, -4.5052251096765286), (1.8035191653133862e-1, 1.0322615349615786e-1)),
            ((2.5683881409370305e-1, -8.8827080967711332e-2), (2.406065783687877e-2, 1.332384407860801e-1)),
            ((-6.6314134324930504e-1, 1.6797190798416117), (9.5392733504580219e-2, 1.4577782316913863e-1)),
        ],
    },
    ExpTable {
        degree: 12,
        max_error: 1.5794568370512388e-12,
        constant: 1.5794568370512388e-12,
        poles: &[
            ((4.5440760164889429, -8.4901333465893027), (1.9520561348179954e-1, 4.828036757093195e-2)),
            ((5.6620610743160092e-5, -3.0163334548830994e-5), (-2.858155209323366e-2, 5.7157145072492476e-2)),
            ((-4.5176035749973144e-3, 5.2631845332685057e-3), (-1.7411910929286511e-2, 8.6510207300848646e-2)),
            ((5.9816298691486942e-3, -1.5575401796328454e-1), (1.1660738776685992e-2, 1.1642614410838476e-1)),
            ((-4.9593175257854851, 5.7743631781641611e-1), (1.3751708958994202e-1, 1.1740332613167614e-1)),
            ((9.1372086239006827e-1, 9.2601267089768745e-1), (6.5243993387029645e-2, 1.3454878847816019e-1)),
        ],
    },
    ExpTable {
        degree: 13,
        max_error: 1.701187076340353e-13,
        constant: -1.701187076340353e-13,
        poles: &[
            ((1.4324541461392715e+1, 0.0), (1.8879628187105502e-1, 0.0)),
            ((-5.3060488854590821e-6, -2.2847886855755401e-5), (-2.669242135318908e-2, 5.1464647431765889e-2)),
            ((1.6260425394281348e-3, 2.6763565633696675e-3), (-1.8246239183320348e-2, 7.6415190975851915e-2)),
            ((-6.0627565249266415, -8.6942699105014161), (1.6256446889348406e-1, 7.7522881185040481e-2)),
            ((-7.9259616558548059e-2, -3.3280188394941599e-2), (3.5993084158820812e-3, 1.0249067333916273e-1)),
            ((-1.3414347046523743, 4.028432093328217), (1.0314244583926231e-1, 1.1949057483619498e-1)),
            ((8.1955937895083393e-1, -3.2684684901919347e-1), (4.426857969329075e-2, 1.2213331023536962e-1)),
        ],
    },
    ExpTable {
        degree: 14,
        max_error: 1.8321743782540413e-14,
        constant: 1.8321743782540413e-14,
        poles: &[
            ((8.4343316329023591, -1.6374503130578108e+1), (1.7016346884019114e-1, 3.6134052859585435e-2)),
            ((-8.5027978656975276e-6, -2.4731468473520057e-7), (-2.5010609462727529e-2, 4.6747765150985121e-2)),
            ((1.3467670020150726e-3, -3.2597066897999094e-4), (-1.8496885191659096e-2, 6.8209986908953814e-2)),
            ((-3.1134580257751498e-2, 3.3650410171078129e-2), (-1.7273995784022636e-3, 9.0948566343820889e-2)),
            ((-1.0383066715886447e+1, 1.6467050954701497), (1.3123264255518872e-1, 9.2540563744176947e-2)),
            ((3.4744746838536767e-3, -5.6903184908655474e-1), (2.9572602424011985e-2, 1.1024645152117883e-1)),
            ((2.4750569243538183, 2.2672433714299837), (7.6788180942371957e-2, 1.1546641861156886e-1)),
        ],
    },
];
