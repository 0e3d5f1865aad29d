#pragma once

// Shipped seed dictionary and category overlay. Mirrors data/seed_dictionary.txt
// and data/category_overlay.tsv; a unit test keeps the copies in sync.

#include <string_view>

namespace tagmine::seed_data {

inline constexpr std::string_view dictionary = R"tm(# Seed dictionary of drug-related hashtags.
# One term per line; duplicates and case variants are collapsed on load.
Norcos
klonopin
ganja
kush
clonazepam
hightime
weed
kpins
maryjane
420
Vicodin
shatter
marijuana
vicoden
topshelflife
wax
gg249
highlife
mgp
M367
stoned
dank
alprazolam2mg
bitxhimhigh
highsociety
benzodiazepines
actavis
dabs
wockhardt
wfayo
weedporn
purpledrink
weshouldsmoke
thc
promethazinecodeinest8
mmj
str8drop
drop
Blunts
caliweed
codeinekid
Chronic
bxtchimhigh
purplebecomingin
Dope
dopehead
dirtyspritegang
Herb
bud
nosealnodeal
Joint
Meds
hydrocodonesyrup
potheadcommunity
promethazinekings
bxtchimhigh
weedstagram
tussionex
ounces
codiene
staylifted
promethazinekings
cannabiscommunity
leanforsale
hydro
sizzurp
rawmuch
nodsquadd
pillgame
dirtysprite2
meds
vampblood
pillgang
oxycodone
loratab
hydrocodone
xanaxbars
norcos
nodsquadd
alprazolam
Painkillers
opiates
mdma
2mg
smoke
benzos
glock_team
percocet
blazed
30mg
stone
percs
dab
xans
oil
xannies
hash
xannys
bong
vicodin
vape
a215
Maryjane
r039
Munchies
Percocet
bluedream
xanies
juicyfruit
s903
sourdiesel
hydromorphone
dankassbombass
alprolozam
toke
pillpopper
cannabis
Norcos
pot
Oxycodone
codeine
roxicodone
promethazine
Zoloft
doublecup
vicodins
qualitest
percocets
caraco
gg249
hitechred
Meds
)tm";

inline constexpr std::string_view category_overlay = R"tm(# Curator-assigned drug classes for seed terms. Terms not listed stay "general".
# term<TAB>category
kush	weed
weed	weed
marijuana	weed
wax	weed
dank	weed
dabs	weed
weedporn	weed
thc	weed
caliweed	weed
bud	weed
weedstagram	weed
cannabiscommunity	weed
hydro	weed
dab	weed
hash	weed
bong	weed
maryjane	weed
bluedream	weed
juicyfruit	weed
sourdiesel	weed
toke	weed
cannabis	weed
pot	weed
ganja	weed
shatter	weed
blunts	weed
chronic	weed
herb	weed
joint	weed
potheadcommunity	weed
mmj	weed
mgp	syrup
str8drop	syrup
codeine	syrup
promethazine	syrup
doublecup	syrup
qualitest	syrup
caraco	syrup
wockhardt	syrup
purpledrink	syrup
promethazinecodeinest8	syrup
codeinekid	syrup
purplebecomingin	syrup
dirtyspritegang	syrup
nosealnodeal	syrup
hydrocodonesyrup	syrup
promethazinekings	syrup
tussionex	syrup
codiene	syrup
leanforsale	syrup
sizzurp	syrup
dirtysprite2	syrup
actavis	syrup
norcos	pills
pillgame	pills
pillgang	pills
loratab	pills
xanaxbars	pills
painkillers	pills
klonopin	pills
clonazepam	pills
kpins	pills
vicodin	pills
vicoden	pills
gg249	pills
m367	pills
alprazolam2mg	pills
benzodiazepines	pills
oxycodone	pills
hydrocodone	pills
alprazolam	pills
benzos	pills
percocet	pills
percs	pills
xans	pills
xannies	pills
xannys	pills
a215	pills
r039	pills
xanies	pills
s903	pills
hydromorphone	pills
alprolozam	pills
pillpopper	pills
roxicodone	pills
zoloft	pills
vicodins	pills
percocets	pills
opiates	pills
)tm";

}  // namespace tagmine::seed_data
