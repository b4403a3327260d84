struct V {
  virtual int f() { return 1; }
};
struct L : virtual V {
  int l;
};
struct R : virtual V {
  int r;
  int f() { return 2; }
};
struct D : L, R {
};
int main() {
  D d;
  L *pl = &d;
  assert(pl->f() == 1);
  return 0;
}
