#include <functional>
#include <map>

#include "dirkwso/tableau.hpp"

namespace dirkwso {
namespace {

constexpr const char* kAppendixNote = "new high weak-stage-order scheme, coefficients as published";

Tableau from_rows(const char* name, const std::vector<std::vector<double>>& rows,
                  const std::vector<double>& weights, const char* note) {
  const auto s = static_cast<Eigen::Index>(rows.size());
  Matrix a = Matrix::Zero(s, s);
  for (Eigen::Index i = 0; i < s; ++i) {
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(rows[std::size_t(i)].size()); ++j) {
      a(i, j) = rows[std::size_t(i)][std::size_t(j)];
    }
  }
  Vector b = Eigen::Map<const Vector>(weights.data(), Eigen::Index(weights.size()));
  return Tableau::validate(a, b, name, Origin::builtin, note);
}

Tableau make_backward_euler() {
  return from_rows("backward_euler", {{1.0}}, {1.0}, "implicit Euler");
}

// Trapezoidal rule written as a two-stage DIRK with an explicit first stage.
Tableau make_crank_nicolson_dirk() {
  return from_rows("crank_nicolson_dirk", {{0.0}, {0.5, 0.5}}, {0.5, 0.5}, "trapezoidal rule");
}

// 5-stage order-4 L-stable SDIRK, gamma = 1/4 (Hairer & Wanner, Solving ODEs II, Table IV.6.5).
Tableau make_dirk541() {
  const std::vector<std::vector<double>> rows = {
      {1.0 / 4.0},
      {1.0 / 2.0, 1.0 / 4.0},
      {17.0 / 50.0, -1.0 / 25.0, 1.0 / 4.0},
      {371.0 / 1360.0, -137.0 / 2720.0, 15.0 / 544.0, 1.0 / 4.0},
      {25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 1.0 / 4.0},
  };
  const std::vector<double> weights = {25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0,
                                       1.0 / 4.0};
  return from_rows("dirk541", rows, weights,
                   "transcribed: Hairer & Wanner, Solving ODEs II, Table IV.6.5 (SDIRK, gamma = 1/4)");
}

Tableau make_dirk744() {
  const std::vector<std::vector<double>> rows = {
      {1.290066345260422e-01},
      {3.315354455306989e-01, 1.177478680001996e-01},
      {-8.009819642882672e-02, -2.408450965101765e-03, 9.242630648045402e-02},
      {-1.730636616639455e+00, 1.513225984674677e+00, 1.221258626309848e+00, 2.266279031096887e-01},
      {1.475353790517696e-01, 3.618481772236499e-01, -5.603544220240282e-01, 2.455453653222619e+00, 5.742190161395324e-01},
      {2.099717815888321e-01, 7.120237463672882e-01, -2.012023940726332e-02, -1.913828539529156e-02, -5.556044541810300e-03, 3.707277349712966e-01},
      {2.387938238483883e-01, 4.762495400483653e-01, 1.233935151213300e-02, 6.011995982693821e-02, 6.553618225489034e-05, -1.270730910442124e-01, 3.395048796261326e-01},
  };
  const std::vector<double> weights = {
      2.387938238483883e-01, 4.762495400483653e-01, 1.233935151213300e-02,
      6.011995982693821e-02, 6.553618225489034e-05, -1.270730910442124e-01,
      3.395048796261326e-01,
  };
  return from_rows("dirk744", rows, weights, kAppendixNote);
}

Tableau make_dirk1254() {
  const std::vector<std::vector<double>> rows = {
      {2.345371908646273e-01},
      {6.874344413888787e-01, 5.515270980695153e-02},
      {-1.183552669539587e-01, 5.463563002913454e-03, 1.458584459918280e-01},
      {-1.832235204042292e-01, 5.269029412008775e-02, 8.203685085133529e-01, 4.812118949092085e-02},
      {9.941572060659400e-02, 4.977904930055774e-03, 5.414758174284321e-02, -1.666571741820749e-03, 8.078975617332473e-02},
      {-9.896614721582678e-01, 2.860682690577833e+00, -1.236119341063179e+00, 2.130219523351530e+00, -1.260655031676537e+00, 2.457717913099987e-01},
      {-5.656238413439102e-02, 1.661985685769353e-01, 6.464600922362508e-01, 6.608854962269927e-01, 3.736054198873429e-01, 6.294456964407685e-01, 5.702752607818027e-01},
      {8.048962104724392e-01, -6.232034990249100e-02, 5.737234603323347e-01, -9.613723511489970e-02, 5.524106361737929e-01, 5.961002486833255e-01, 1.978411600659203e-01, 3.156238724024008e-01},
      {-1.606381759216300e-01, 6.833397073337708e-01, 4.734578665308685e-01, 8.037708984872738e-01, -1.094498069459834e-02, 6.151263362711297e-01, 3.908946848682723e-01, 8.966103265353116e-02, 2.973255537857041e-02},
      {7.074283235644631e-01, 4.392037300952482e-01, -3.623592480237268e-02, 7.189990308645932e-04, 5.820968279166545e-01, 3.302003177175218e-01, -2.394564021215881e-01, -7.540283547997615e-03, 1.702137469523672e-01, 6.268780138721711e-01},
      {1.361197981133694e-01, -7.486549901902831e-01, 1.893908350024949e+00, 3.940485196730028e-01, 6.240233526545023e-02, 7.511983862200027e-01, -5.283465265730526e-01, -1.661625677872943e+00, 9.998723833190827e-01, 1.377776742457387e+00, 8.905676409277480e-01},
      {-7.433675378768276e-01, 1.490594423766965e-01, -2.042884056742363e-02, 8.565329438087443e-04, 1.357261590983184e+00, 2.067512027776675e-03, 9.836884265759428e-02, -1.357936974507222e-02, -5.428992174996300e-02, -3.803299038293005e-02, -9.150525836295019e-03, 2.712352651694511e-01},
  };
  const std::vector<double> weights = {
      -7.433675378768276e-01, 1.490594423766965e-01, -2.042884056742363e-02,
      8.565329438087443e-04, 1.357261590983184e+00, 2.067512027776675e-03,
      9.836884265759428e-02, -1.357936974507222e-02, -5.428992174996300e-02,
      -3.803299038293005e-02, -9.150525836295019e-03, 2.712352651694511e-01,
  };
  return from_rows("dirk1254", rows, weights, kAppendixNote);
}

Tableau make_dirk1255() {
  const std::vector<std::vector<double>> rows = {
      {4.113473525867655e-02},
      {1.603459327727949e-01, 6.663913326722831e-02},
      {-3.424389044264752e-01, 8.658006324816373e-01, 9.893519116923277e-02},
      {9.437182028870806e+00, -1.088783359642350e+01, 2.644025436733866e+00, 1.846155800500574e-01},
      {-3.425409029430815e-01, 5.172239272544332e-01, 9.163589909678043e-01, 5.225142808845742e-02, 1.165485436026433e-01},
      {-2.094441177460360e+00, 2.577655753533404e+00, 5.704405293326313e-01, 1.213637180023516e-01, -4.752289775376601e-01, 5.285605969257756e-01},
      {3.391631788320480e-01, -2.797427027028997e-01, 1.039483063369094e+00, 5.978770926212172e-02, -2.132900327070380e-01, 8.344318363436753e-02, 2.410106515779412e-01},
      {5.904282488642163e+00, 3.171195765985073e+00, -1.236822836316587e+01, -4.989519066913001e-01, 2.160529620826442e+00, 1.916104322021480e+00, 1.988059486291180e+00, 2.232092386922440e-01},
      {4.616443509508975e-01, -1.933433560549238e-01, -1.212541486279519e-01, 6.662362039716674e-02, 4.254912950625259e-01, 7.856131647013712e-01, 8.369551389357689e-01, 1.604780447895926e-01, 3.616125951766939e-01},
      {-7.087669749878204e-01, 6.466527094491541e-01, 4.758821526542215e-01, -2.570518451375722e-01, 1.123185062554392e+00, 5.546921612875290e-01, 3.192424333237050e-01, 3.612077612576969e-01, 5.866779836068974e-01, 2.353799736246102e-01},
      {4.264162484855930e-01, 1.322816663477840e+00, 4.245673729758231e-01, -2.530402764527700e+00, -7.822016897497742e-02, 1.054463080605071e+00, 4.645590541391895e-01, 1.145097379521439e+00, 4.301337846893282e-01, 1.499513057076809e+00, 1.447942640822165e-02},
      {1.207394392845339e-02, 5.187080074649261e-01, 1.121304244847239e-01, -4.959806334780896e-03, -1.345031364651444e+00, 3.398828703760807e-01, 8.159251531671077e-01, -2.640104266439604e-03, 1.439060901763520e-02, -6.556567796749947e-03, 6.548135446843367e-04, 5.454220210658036e-01},
  };
  const std::vector<double> weights = {
      1.207394392845339e-02, 5.187080074649261e-01, 1.121304244847239e-01,
      -4.959806334780896e-03, -1.345031364651444e+00, 3.398828703760807e-01,
      8.159251531671077e-01, -2.640104266439604e-03, 1.439060901763520e-02,
      -6.556567796749947e-03, 6.548135446843367e-04, 5.454220210658036e-01,
  };
  return from_rows("dirk1255", rows, weights, kAppendixNote);
}

// Five-stage, fifth-order, A-stable, not stiffly accurate. Stand-in for the
// Kennedy & Carpenter (2016) Table 24 scheme with the same properties.
Tableau make_dirk551() {
  const std::vector<std::vector<double>> rows = {
      {2.7542172066562676e-01},
      {-1.8990076906783318e-01, 2.2067830777207637e-01},
      {-4.6418152414773761e-01, 4.6019538892349648e-01, 5.1070789930802774e-01},
      {-6.8771365974923171e-01, 4.1504132001925809e-01, 1.2592682960237617e-01, 5.6771965750435516e-01},
      {4.7631257811414451e-01, -4.8975337057565821e-02, 4.3755696619936202e-01, -4.6253093785334341e-02,
       9.0679443264696888e-02},
  };
  const std::vector<double> weights = {5.9117804526877493e-01, 9.3474667337705541e-02, 1.0313009836857034e+00,
                                       -9.4758261030905000e-01, 2.3162891401686606e-01};
  return from_rows("dirk551", rows, weights,
                   "substitute for Kennedy & Carpenter (2016) Table 24: A-stable order-5 DIRK from a local search");
}

const std::map<std::string, std::function<Tableau()>, std::less<>>& catalog() {
  static const std::map<std::string, std::function<Tableau()>, std::less<>> entries = {
      {"dirk744", make_dirk744},
      {"dirk1254", make_dirk1254},
      {"dirk1255", make_dirk1255},
      {"dirk541", make_dirk541},
      {"dirk551", make_dirk551},
      {"backward_euler", make_backward_euler},
      {"crank_nicolson_dirk", make_crank_nicolson_dirk},
  };
  return entries;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {"dirk744", "dirk1254", "dirk1255", "dirk541",
                                                 "dirk551", "backward_euler", "crank_nicolson_dirk"};
  return names;
}

Tableau builtin(std::string_view name) {
  const auto& entries = catalog();
  const auto it = entries.find(name);
  if (it == entries.end()) throw TableauError("unknown built-in scheme '" + std::string(name) + "'");
  return it->second();
}

}  // namespace dirkwso
