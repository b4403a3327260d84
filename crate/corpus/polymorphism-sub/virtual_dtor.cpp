int released = 0;
struct Res {
  virtual ~Res() { released = released + 1; }
};
struct File : Res {
  ~File() { released = released + 10; }
};
int main() {
  Res *r = new File();
  delete r;
  assert(released == 11);
  return 0;
}
