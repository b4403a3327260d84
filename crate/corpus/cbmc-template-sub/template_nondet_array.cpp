template <int N>
struct Table {
  int cells[N];
  int at(int i) { return cells[i]; }
};
int main() {
  Table<5> t;
  int i = nondet_int();
  __CPROVER_assume(i >= 0 && i <= 5);
  int v = t.at(i);
  return 0;
}
