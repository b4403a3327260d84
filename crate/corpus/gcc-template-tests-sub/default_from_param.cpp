template <typename T, typename U = T>
struct Pair {
  T first;
  U second;
};
int main() {
  Pair<int> p;
  p.first = 1;
  p.second = 2;
  Pair<int, bool> q;
  q.second = true;
  assert(p.first + p.second == 3 && q.second);
  return 0;
}
