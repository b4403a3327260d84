struct Base {
  virtual int id() { return 1; }
};
struct D1 : Base {
  int id() { return 2; }
};
struct D2 : Base {
  int id() { return 3; }
};
int main() {
  Base *p;
  if (nondet_bool())
    p = new D1();
  else
    p = new D2();
  int r = p->id();
  assert(r == 2 || r == 3);
  delete p;
  return 0;
}
