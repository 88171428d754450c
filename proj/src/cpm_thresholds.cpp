// Generated by tools/gen_cpm_thresholds (streams=100000, length=500, seed=20110101). Do not edit.
#include "cpm_thresholds.hpp"

#include <array>

namespace psmdid::detail {

namespace {

constexpr std::array<ThresholdPoint, 81> kArl370 = {{
    {20, 3.2289},
    {21, 3.1377},
    {22, 3.1052},
    {23, 3.0867},
    {24, 3.0921},
    {25, 3.0875},
    {26, 3.0904},
    {27, 3.0861},
    {28, 3.0794},
    {29, 3.0742},
    {30, 3.0828},
    {31, 3.0831},
    {32, 3.0850},
    {33, 3.0869},
    {34, 3.0860},
    {35, 3.0868},
    {36, 3.0866},
    {37, 3.0861},
    {38, 3.0844},
    {39, 3.0819},
    {40, 3.0808},
    {41, 3.0828},
    {42, 3.0828},
    {43, 3.0844},
    {44, 3.0866},
    {45, 3.0891},
    {46, 3.0906},
    {47, 3.0928},
    {48, 3.0932},
    {49, 3.0938},
    {50, 3.0945},
    {51, 3.0961},
    {52, 3.0975},
    {53, 3.0981},
    {54, 3.0989},
    {55, 3.1001},
    {56, 3.1024},
    {57, 3.1039},
    {58, 3.1038},
    {59, 3.1044},
    {60, 3.1044},
    {65, 3.1050},
    {70, 3.1033},
    {75, 3.1042},
    {80, 3.1068},
    {85, 3.1156},
    {90, 3.1182},
    {95, 3.1204},
    {100, 3.1202},
    {105, 3.1202},
    {110, 3.1166},
    {115, 3.1097},
    {120, 3.1094},
    {125, 3.1094},
    {130, 3.1137},
    {135, 3.1161},
    {140, 3.1196},
    {145, 3.1146},
    {150, 3.1137},
    {155, 3.1126},
    {160, 3.1178},
    {165, 3.1146},
    {170, 3.1160},
    {175, 3.1162},
    {180, 3.1203},
    {185, 3.1210},
    {190, 3.1263},
    {195, 3.1287},
    {200, 3.1215},
    {225, 3.1130},
    {250, 3.1151},
    {275, 3.1212},
    {300, 3.1255},
    {325, 3.1239},
    {350, 3.1230},
    {375, 3.1253},
    {400, 3.1163},
    {425, 3.1213},
    {450, 3.1164},
    {475, 3.1133},
    {500, 3.1209},
}};

constexpr std::array<ThresholdPoint, 81> kArl500 = {{
    {20, 3.2733},
    {21, 3.2080},
    {22, 3.1720},
    {23, 3.1506},
    {24, 3.1438},
    {25, 3.1458},
    {26, 3.1530},
    {27, 3.1493},
    {28, 3.1514},
    {29, 3.1598},
    {30, 3.1597},
    {31, 3.1631},
    {32, 3.1664},
    {33, 3.1690},
    {34, 3.1690},
    {35, 3.1695},
    {36, 3.1696},
    {37, 3.1676},
    {38, 3.1654},
    {39, 3.1649},
    {40, 3.1630},
    {41, 3.1655},
    {42, 3.1667},
    {43, 3.1681},
    {44, 3.1725},
    {45, 3.1752},
    {46, 3.1775},
    {47, 3.1781},
    {48, 3.1774},
    {49, 3.1776},
    {50, 3.1798},
    {51, 3.1795},
    {52, 3.1810},
    {53, 3.1825},
    {54, 3.1867},
    {55, 3.1887},
    {56, 3.1915},
    {57, 3.1925},
    {58, 3.1926},
    {59, 3.1930},
    {60, 3.1894},
    {65, 3.1895},
    {70, 3.1910},
    {75, 3.1900},
    {80, 3.1896},
    {85, 3.1982},
    {90, 3.2011},
    {95, 3.2061},
    {100, 3.2060},
    {105, 3.2072},
    {110, 3.2025},
    {115, 3.1966},
    {120, 3.1979},
    {125, 3.1986},
    {130, 3.2019},
    {135, 3.2028},
    {140, 3.2060},
    {145, 3.2046},
    {150, 3.2032},
    {155, 3.2017},
    {160, 3.2058},
    {165, 3.2075},
    {170, 3.2087},
    {175, 3.2125},
    {180, 3.2152},
    {185, 3.2149},
    {190, 3.2141},
    {195, 3.2193},
    {200, 3.2131},
    {225, 3.2064},
    {250, 3.2047},
    {275, 3.2095},
    {300, 3.2131},
    {325, 3.2102},
    {350, 3.2125},
    {375, 3.2154},
    {400, 3.2092},
    {425, 3.2129},
    {450, 3.2080},
    {475, 3.2105},
    {500, 3.2172},
}};

constexpr std::array<ThresholdPoint, 81> kArl1000 = {{
    {20, 3.3808},
    {21, 3.3401},
    {22, 3.3055},
    {23, 3.2907},
    {24, 3.2909},
    {25, 3.3087},
    {26, 3.2956},
    {27, 3.3138},
    {28, 3.3056},
    {29, 3.3127},
    {30, 3.3192},
    {31, 3.3235},
    {32, 3.3294},
    {33, 3.3345},
    {34, 3.3389},
    {35, 3.3406},
    {36, 3.3456},
    {37, 3.3511},
    {38, 3.3535},
    {39, 3.3554},
    {40, 3.3568},
    {41, 3.3563},
    {42, 3.3575},
    {43, 3.3595},
    {44, 3.3611},
    {45, 3.3630},
    {46, 3.3647},
    {47, 3.3631},
    {48, 3.3650},
    {49, 3.3665},
    {50, 3.3668},
    {51, 3.3641},
    {52, 3.3622},
    {53, 3.3617},
    {54, 3.3656},
    {55, 3.3672},
    {56, 3.3698},
    {57, 3.3713},
    {58, 3.3751},
    {59, 3.3788},
    {60, 3.3753},
    {65, 3.3818},
    {70, 3.3865},
    {75, 3.3886},
    {80, 3.3903},
    {85, 3.3943},
    {90, 3.3988},
    {95, 3.4010},
    {100, 3.4053},
    {105, 3.4098},
    {110, 3.4047},
    {115, 3.3970},
    {120, 3.3934},
    {125, 3.3968},
    {130, 3.4032},
    {135, 3.4028},
    {140, 3.4018},
    {145, 3.4020},
    {150, 3.4003},
    {155, 3.4016},
    {160, 3.4018},
    {165, 3.4101},
    {170, 3.4124},
    {175, 3.4120},
    {180, 3.4070},
    {185, 3.4053},
    {190, 3.4138},
    {195, 3.4245},
    {200, 3.4178},
    {225, 3.4019},
    {250, 3.4084},
    {275, 3.4136},
    {300, 3.4259},
    {325, 3.4234},
    {350, 3.4171},
    {375, 3.4257},
    {400, 3.4252},
    {425, 3.4207},
    {450, 3.4155},
    {475, 3.4079},
    {500, 3.4183},
}};

}  // namespace

std::span<const ThresholdPoint> cpm_threshold_table(int arl0) {
    if (arl0 == 370) return kArl370;
    if (arl0 == 500) return kArl500;
    if (arl0 == 1000) return kArl1000;
    return {};
}

}  // namespace psmdid::detail
